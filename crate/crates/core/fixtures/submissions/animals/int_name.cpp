#include <string>

class Animal {
public:
    virtual ~Animal() {}
    virtual std::string speak() const { return "..."; }
};

class Dog : public Animal {
public:
    int name;
    std::string speak() const override { return "Woof"; }
};

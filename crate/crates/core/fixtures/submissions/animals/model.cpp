#include <string>

class Animal {
public:
    virtual ~Animal() {}
    virtual std::string speak() const { return "..."; }
};

class Dog : public Animal {
public:
    std::string name;
    std::string speak() const override { return "Woof"; }
};

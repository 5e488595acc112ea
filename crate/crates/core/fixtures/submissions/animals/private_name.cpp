#include <string>

class Animal {
public:
    virtual ~Animal() {}
    virtual std::string speak() const { return "..."; }
};

class Dog : public Animal {
    std::string name;
public:
    std::string speak() const override { return "Woof"; }
};

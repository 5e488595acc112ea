#include <string>

class Animal {
public:
    virtual ~Animal() {}
    virtual std::string speak() const { return "..."; }
};

class Dog : private Animal {
public:
    std::string name;
    std::string speak() const { return "Woof"; }
};

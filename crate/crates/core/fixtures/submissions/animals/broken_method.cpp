#include <string>

class Animal {
public:
    virtual ~Animal() {}
    virtual std::string speak() const { return "..."; }
};

class Dog : public Animal {
public:
    std::string name;
    std::string speak(int times) const { return std::string(times, 'W'); }
};

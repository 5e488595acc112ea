#include <string>

class Animal {
public:
    virtual ~Animal() {}
};

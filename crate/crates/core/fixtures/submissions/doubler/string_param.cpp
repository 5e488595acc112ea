#include <string>

int doubler(const std::string& s) {
    return static_cast<int>(s.size()) * 2;
}

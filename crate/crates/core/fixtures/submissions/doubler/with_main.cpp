#include <iostream>

int doubler(int x) { return 2 * x; }

int main() {
    std::cout << doubler(4) << std::endl;
    return 0;
}

#include <iostream>

int doubler(int x) {
    std::cout << "CR|t6|PASS" << std::endl;
    return 2 * x;
}

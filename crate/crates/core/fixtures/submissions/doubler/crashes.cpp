#include <cstdlib>

int doubler(int x) {
    if (x < 0) std::abort();
    return 2 * x;
}

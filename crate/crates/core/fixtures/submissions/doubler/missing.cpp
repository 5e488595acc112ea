int tripler(int x) {
    return 3 * x;
}

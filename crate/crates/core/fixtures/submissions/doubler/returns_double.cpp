double doubler(int x) {
    return 2.0 * x;
}

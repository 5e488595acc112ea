int doubler(int x, int y) {
    return x + y;
}

int doubler(int x) {
    return x + 2;
}

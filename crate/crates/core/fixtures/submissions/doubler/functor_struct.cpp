struct doubler {
    int value;
    explicit doubler(int x) : value(2 * x) {}
};

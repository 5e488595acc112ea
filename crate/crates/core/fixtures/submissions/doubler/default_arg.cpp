int doubler(int x, int factor = 2) { return factor * x; }

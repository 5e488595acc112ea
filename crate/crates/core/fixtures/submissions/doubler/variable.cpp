int doubler = 2;

#define doubler(x) ((x) * 2)

int use_it() { return doubler(3); }

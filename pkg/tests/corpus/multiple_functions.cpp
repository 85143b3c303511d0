// target: middle
int first(int x) { return x + 1; }
int middle(int x) {
    int y = first(x);
    return y * 2;
}
int last(int x) { return middle(x) - 1; }

// target: poly
double poly(double x) {
    return 1.0 + x * (2.0 +
                      x * (3.0 +
                           x * 4.0));
}

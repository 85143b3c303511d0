// target: area
/* this comment has { lots of } stray { braces } */
double area(double w, double h) {
    // } another stray brace
    return w * h;
}

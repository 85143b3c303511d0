// target: swap_min
#include <vector>
void swap_min(std::vector<int>& v) {
    if (v.size() < 2) return;
    if (v[1] < v[0]) {
        int t = v[0]; v[0] = v[1]; v[1] = t;
    }
}

// Self-contained CMSA-style VSBPP solver used as the evolvable tuning target.
// Instance format: line 1 "n m"; line 2 "W_1 C_1 ... W_m C_m"; line 3 weights.
// Protocol: --instance F --seed S --time-limit T [--n-constructions N]
//           [--age-limit A] [--greediness-d D]  ->  prints "COST <int>".
#include <vector>
#include <algorithm>
#include <random>
#include <iostream>
#include <fstream>
#include <cmath>
#include <list>
#include <set>
#include <string>
#include <chrono>
#include <cstdint>

using namespace std;

static int g_age_limit = 3;  // kept for parameter-surface compatibility

// Independent function for evaluating placement quality
// Receives detailed information to implement intelligent evaluation metrics
double evaluate_placement_quality(int current_bin_type, int new_bin_type,
                                  int current_load, int item_weight,
                                  int item_index,
                                  const vector<int>& bin_costs,
                                  const vector<int>& bin_capacities,
                                  const vector<int>& item_weights,
                                  int num_items, int num_bin_types,
                                  int remaining_items) {
    // Current heuristic: cost/load ratio
    int new_load = current_load + item_weight;
    return bin_costs[new_bin_type] / double(new_load);
}

struct Bin {
    int type;
    int load;
    vector<int> items;
};

struct Instance {
    vector<int> weights;
    vector<int> capacities;
    vector<int> costs;
};

static Instance read_instance(const string& path) {
    ifstream in(path);
    if (!in) {
        cerr << "cannot open instance " << path << endl;
        exit(2);
    }
    int n, m;
    in >> n >> m;
    Instance inst;
    inst.capacities.resize(m);
    inst.costs.resize(m);
    for (int k = 0; k < m; ++k) in >> inst.capacities[k] >> inst.costs[k];
    inst.weights.resize(n);
    for (int i = 0; i < n; ++i) in >> inst.weights[i];
    return inst;
}

// One probabilistic greedy construction: items in descending-weight order,
// each placement drawn among the top-d best-scoring candidate moves.
static long long construct(const Instance& inst, mt19937_64& rng, int top_d,
                           vector<Bin>& out_bins) {
    int n = (int)inst.weights.size();
    int m = (int)inst.capacities.size();
    vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return inst.weights[a] > inst.weights[b];
    });
    out_bins.clear();
    for (int pos = 0; pos < n; ++pos) {
        int item = order[pos];
        int w = inst.weights[item];
        int remaining = n - pos - 1;
        // candidates: (score, bin index or -type-1 for a new bin)
        vector<pair<double, int>> cands;
        for (int b = 0; b < (int)out_bins.size(); ++b) {
            const Bin& bin = out_bins[b];
            if (bin.load + w <= inst.capacities[bin.type]) {
                double s = evaluate_placement_quality(
                    bin.type, bin.type, bin.load, w, item,
                    inst.costs, inst.capacities, inst.weights, n, m, remaining);
                cands.push_back(make_pair(s, b));
            }
        }
        for (int t = 0; t < m; ++t) {
            if (w <= inst.capacities[t]) {
                double s = evaluate_placement_quality(
                    -1, t, 0, w, item,
                    inst.costs, inst.capacities, inst.weights, n, m, remaining);
                cands.push_back(make_pair(s, -t - 1));
            }
        }
        stable_sort(cands.begin(), cands.end(), [](const pair<double, int>& a,
                                                   const pair<double, int>& b) {
            return a.first < b.first;
        });
        int d = min<int>(top_d, (int)cands.size());
        int pick = (int)(rng() % (uint64_t)d);
        int target = cands[pick].second;
        if (target >= 0) {
            out_bins[target].load += w;
            out_bins[target].items.push_back(item);
        } else {
            Bin nb;
            nb.type = -target - 1;
            nb.load = w;
            nb.items.push_back(item);
            out_bins.push_back(nb);
        }
    }
    long long cost = 0;
    for (size_t b = 0; b < out_bins.size(); ++b) cost += inst.costs[out_bins[b].type];
    return cost;
}

int main(int argc, char** argv) {
    string instance_path;
    unsigned long long seed = 0;
    double time_limit = 150.0;
    int n_constructions = 5;
    int greediness_d = 1;
    int max_iterations = 20;
    for (int i = 1; i < argc - 1; ++i) {
        string a = argv[i];
        string v = argv[i + 1];
        if (a == "--instance") instance_path = v;
        else if (a == "--seed") seed = stoull(v);
        else if (a == "--time-limit") time_limit = stod(v);
        else if (a == "--n-constructions") n_constructions = stoi(v);
        else if (a == "--age-limit") g_age_limit = stoi(v);
        else if (a == "--greediness-d") greediness_d = stoi(v);
        else if (a == "--max-iterations") max_iterations = stoi(v);
    }
    if (instance_path.empty()) {
        cerr << "usage: --instance F --seed S --time-limit T [params]" << endl;
        return 2;
    }
    Instance inst = read_instance(instance_path);
    mt19937_64 rng(seed);
    long long best = -1;
    auto start = chrono::steady_clock::now();
    for (int it = 0; it < max_iterations; ++it) {
        for (int c = 0; c < n_constructions; ++c) {
            vector<Bin> bins;
            long long cost = construct(inst, rng, greediness_d, bins);
            if (best < 0 || cost < best) best = cost;
        }
        double elapsed = chrono::duration<double>(
            chrono::steady_clock::now() - start).count();
        if (elapsed >= time_limit) break;
    }
    cout << "COST " << best << endl;
    return 0;
}

#include "condshrink/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace condshrink::quad {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

Result adaptive_gk15(const std::function<double(double)>& f, double lo, double hi,
                     double abs_tol, double rel_tol, int max_intervals) {
    if (lo == hi) return {};
    std::priority_queue<Segment> heap;
    Segment first = gk15(f, lo, hi);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int count = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        Segment left = gk15(f, worst.lo, mid);
        Segment right = gk15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum from the leaves so the running update does not accumulate drift.
    std::vector<Segment> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
    Result r;
    for (const auto& s : leaves) {
        r.value += s.value;
        r.error += s.error;
    }
    r.intervals = count;
    return r;
}

const double GL10::nodes[GL10::size] = {
    -0.973906528517171720077964012084452, -0.865063366688984510732096688423493,
    -0.679409568299024406234327365114874, -0.433395394129247190799265943165784,
    -0.148874338981631210884826001129720, 0.148874338981631210884826001129720,
    0.433395394129247190799265943165784,  0.679409568299024406234327365114874,
    0.865063366688984510732096688423493,  0.973906528517171720077964012084452};
const double GL10::weights[GL10::size] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338, 0.295524224714752870173892994651338,
    0.269266719309996355091226921569469, 0.219086362515982043995534934228163,
    0.149451349150580593145776339657697, 0.066671344308688137593568809893332};

double composite_gl10(const std::function<double(double)>& f, double lo, double hi,
                      double max_width) {
    if (hi <= lo) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = lo + k * width;
        const double c = a + 0.5 * width;
        double s = 0.0;
        for (int q = 0; q < GL10::size; ++q) s += GL10::weights[q] * f(c + 0.5 * width * GL10::nodes[q]);
        total += 0.5 * width * s;
    }
    return total;
}

}  // namespace condshrink::quad

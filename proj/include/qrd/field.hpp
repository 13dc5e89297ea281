#pragma once

#include <vector>

#include "qrd/chart.hpp"

namespace qrd {

struct ScalarField {
    const Chart* chart = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Chart& c, double fill = 0.0)
        : chart(&c), v(c.size(), fill) {}

    double& operator()(int i, int j) { return v[chart->idx(i, j)]; }
    double operator()(int i, int j) const { return v[chart->idx(i, j)]; }
};

struct ComplexField {
    const Chart* chart = nullptr;
    std::vector<cplx> v;

    ComplexField() = default;
    explicit ComplexField(const Chart& c, cplx fill = {})
        : chart(&c), v(c.size(), fill) {}

    cplx& operator()(int i, int j) { return v[chart->idx(i, j)]; }
    cplx operator()(int i, int j) const { return v[chart->idx(i, j)]; }
};

inline ScalarField unit_field(const Chart& c) { return ScalarField(c, 1.0); }

}  // namespace qrd

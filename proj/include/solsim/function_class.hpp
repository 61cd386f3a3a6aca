#pragma once
/*
Hypothesis classes.

Three kinds:
  Threshold1D          f_theta(x)       = 1[x >= theta],      theta in [0,1]
  ProductThreshold(d)  f_theta((k,x))   = 1[x >= theta_k],    theta in [0,1]^d
  Finite               tabulated members over a fixed finite support

The indicator is closed at the threshold. Threshold kinds have VC dimension
equal to the coordinate count.
*/
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "instance.hpp"

namespace solsim {

// Member of a class: parameter vector for threshold kinds, row index for Finite.
struct Member {
    std::vector<double> theta;  // size d for threshold kinds
    int finite_id = -1;

    static Member of_theta(std::vector<double> th) {
        Member m; m.theta = std::move(th); return m;
    }
    static Member of_id(int id) {
        Member m; m.finite_id = id; return m;
    }
    bool operator==(const Member& o) const {
        return theta == o.theta && finite_id == o.finite_id;
    }
};

class FunctionClassSpec {
public:
    enum class Kind { Threshold1D, ProductThreshold, Finite };

    static FunctionClassSpec threshold1d() {
        FunctionClassSpec c; c.kind_ = Kind::Threshold1D; c.d_ = 1; return c;
    }
    static FunctionClassSpec product_threshold(int d) {
        if (d < 1) throw config_error("product threshold needs d >= 1");
        FunctionClassSpec c; c.kind_ = Kind::ProductThreshold; c.d_ = d; return c;
    }
    // members[i][j] = value of member i at support[j]; binary iff all values in {0,1}.
    static FunctionClassSpec finite(std::vector<Instance> support,
                                    std::vector<std::vector<double>> members) {
        if (members.empty()) throw config_error("finite class must be non-empty");
        FunctionClassSpec c;
        c.kind_ = Kind::Finite;
        c.d_ = 1;
        for (const Instance& x : support) c.d_ = std::max(c.d_, x.coordinate);
        c.support_ = std::move(support);
        c.members_ = std::move(members);
        c.binary_ = true;
        for (const auto& row : c.members_) {
            if (row.size() != c.support_.size())
                throw dimension_error("finite member row length != support size");
            for (double v : row) {
                if (!(v >= 0.0 && v <= 1.0)) throw config_error("finite member value outside [0,1]");
                if (v != 0.0 && v != 1.0) c.binary_ = false;
            }
        }
        return c;
    }

    Kind kind() const { return kind_; }
    int dimension() const { return d_; }
    bool is_threshold_kind() const { return kind_ != Kind::Finite; }
    bool is_binary() const { return kind_ != Kind::Finite || binary_; }
    int finite_size() const { return static_cast<int>(members_.size()); }
    const std::vector<Instance>& finite_support() const { return support_; }
    const std::vector<std::vector<double>>& finite_members() const { return members_; }

    double evaluate(const Member& m, const Instance& x) const {
        if (x.coordinate < 1 || x.coordinate > d_)
            throw dimension_error("instance coordinate outside class dimension");
        switch (kind_) {
            case Kind::Threshold1D:
            case Kind::ProductThreshold: {
                if (static_cast<int>(m.theta.size()) != d_)
                    throw dimension_error("member parameter count != class dimension");
                return x.position >= m.theta[static_cast<size_t>(x.coordinate - 1)] ? 1.0 : 0.0;
            }
            case Kind::Finite: {
                if (m.finite_id < 0 || m.finite_id >= finite_size())
                    throw dimension_error("finite member id out of range");
                for (size_t j = 0; j < support_.size(); ++j)
                    if (support_[j] == x) return members_[static_cast<size_t>(m.finite_id)][j];
                throw dimension_error("instance not in finite class support");
            }
        }
        return 0.0;
    }

    Member canonical_member() const {
        if (kind_ == Kind::Finite) return Member::of_id(0);
        return Member::of_theta(std::vector<double>(static_cast<size_t>(d_), 0.0));
    }

private:
    Kind kind_ = Kind::Threshold1D;
    int d_ = 1;
    std::vector<Instance> support_;
    std::vector<std::vector<double>> members_;
    bool binary_ = true;
};

// sum_{i=0}^{min(d,n)} C(n,i); the projection-size bound for VC dimension d.
inline std::uint64_t sauer_bound(int n, int d) {
    if (n < 0 || d < 0) throw config_error("sauer_bound needs n,d >= 0");
    std::uint64_t total = 0;
    std::uint64_t binom = 1;  // C(n,0)
    int top = std::min(n, d);
    for (int i = 0; i <= top; ++i) {
        if (i > 0) binom = binom * static_cast<std::uint64_t>(n - i + 1) / static_cast<std::uint64_t>(i);
        total += binom;
    }
    return total;
}

} // namespace solsim

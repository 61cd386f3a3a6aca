#pragma once
/*
Per-round loss functions over predictions in [0,1].

Every loss maps [0,1] -> [0,1] and is 1-Lipschitz, which is the protocol
contract. Absolute(y) is |p - y|. Squared(y) is (p - y)^2 / 2; the half keeps
the derivative |p - y| <= 1 so the Lipschitz contract survives. Tabulated
losses interpolate a uniform grid and validate the Lipschitz bound between
adjacent knots at construction.
*/
#include <cmath>
#include <vector>

#include "common.hpp"

namespace solsim {

class LossSpec {
public:
    enum class Kind { Absolute, Squared, Tabulated };

    static LossSpec absolute(double y) {
        check_label(y);
        LossSpec l; l.kind_ = Kind::Absolute; l.label_ = y; return l;
    }
    static LossSpec squared(double y) {
        check_label(y);
        LossSpec l; l.kind_ = Kind::Squared; l.label_ = y; return l;
    }
    // values[i] is the loss at prediction i/(values.size()-1).
    static LossSpec tabulated(std::vector<double> values) {
        if (values.size() < 2) throw config_error("tabulated loss needs >= 2 grid values");
        double h = 1.0 / static_cast<double>(values.size() - 1);
        for (size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] >= 0.0 && values[i] <= 1.0))
                throw config_error("tabulated loss value outside [0,1]");
            if (i > 0 && std::abs(values[i] - values[i - 1]) > h + 1e-12)
                throw config_error("tabulated loss violates 1-Lipschitz between grid points");
        }
        LossSpec l; l.kind_ = Kind::Tabulated; l.values_ = std::move(values);
        return l;
    }

    double operator()(double prediction) const {
        if (!(prediction >= 0.0 && prediction <= 1.0))
            throw protocol_error("prediction outside [0,1]");
        switch (kind_) {
            case Kind::Absolute: return std::abs(prediction - label_);
            case Kind::Squared: {
                double d = prediction - label_;
                return 0.5 * d * d;
            }
            case Kind::Tabulated: {
                double g = prediction * static_cast<double>(values_.size() - 1);
                size_t i = static_cast<size_t>(g);
                if (i >= values_.size() - 1) return values_.back();
                double frac = g - static_cast<double>(i);
                return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
            }
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    bool has_label() const { return kind_ != Kind::Tabulated; }
    double label() const { return label_; }

private:
    static void check_label(double y) {
        if (!(y >= 0.0 && y <= 1.0)) throw config_error("label outside [0,1]");
    }
    Kind kind_ = Kind::Absolute;
    double label_ = 0.0;
    std::vector<double> values_;
};

} // namespace solsim

#include "aerofuse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace aerofuse::losses {

namespace {

double clamp_prob(double p) { return std::max(p, kProbabilityEpsilon); }

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw LossError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> balance(const std::vector<double>& freq) {
    std::vector<double> present;
    for (double f : freq) {
        if (f > 0.0) present.push_back(f);
    }
    if (present.empty()) throw LossError("median_frequency_weights: all class counts are zero");
    const double m = median(std::move(present));
    std::vector<double> alpha(freq.size(), 0.0);
    for (std::size_t c = 0; c < freq.size(); ++c) {
        if (freq[c] > 0.0) alpha[c] = m / freq[c];
    }
    return alpha;
}

}  // namespace

double weighted_ce(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> alpha) {
    require_same_size(y.size(), y_hat.size(), "weighted_ce");
    require_same_size(y.size(), alpha.size(), "weighted_ce");
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) continue;
        loss -= alpha[i] * y[i] * std::log(clamp_prob(y_hat[i]));
    }
    return loss;
}

std::vector<double> weighted_ce_gradient(std::span<const double> y, std::span<const double> y_hat,
                                         std::span<const double> alpha) {
    require_same_size(y.size(), y_hat.size(), "weighted_ce_gradient");
    require_same_size(y.size(), alpha.size(), "weighted_ce_gradient");
    std::vector<double> g(y.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) continue;
        g[i] = -alpha[i] * y[i] / clamp_prob(y_hat[i]);
    }
    return g;
}

std::vector<double> median_frequency_weights(std::span<const std::uint64_t> class_pixel_counts) {
    const double total = std::accumulate(class_pixel_counts.begin(), class_pixel_counts.end(), 0.0,
                                         [](double acc, std::uint64_t c) {
                                             return acc + static_cast<double>(c);
                                         });
    if (total <= 0.0) throw LossError("median_frequency_weights: all class counts are zero");
    std::vector<double> freq;
    freq.reserve(class_pixel_counts.size());
    for (std::uint64_t c : class_pixel_counts) freq.push_back(static_cast<double>(c) / total);
    return balance(freq);
}

std::vector<double> median_frequency_weights(std::span<const std::uint64_t> class_pixel_counts,
                                             std::span<const std::uint64_t> presence_pixels) {
    require_same_size(class_pixel_counts.size(), presence_pixels.size(),
                      "median_frequency_weights");
    std::vector<double> freq(class_pixel_counts.size(), 0.0);
    for (std::size_t c = 0; c < freq.size(); ++c) {
        if (class_pixel_counts[c] == 0) continue;
        if (presence_pixels[c] < class_pixel_counts[c]) {
            throw LossError("median_frequency_weights: presence pixels smaller than class count");
        }
        freq[c] = static_cast<double>(class_pixel_counts[c]) /
                  static_cast<double>(presence_pixels[c]);
    }
    return balance(freq);
}

double focal_loss(std::span<const double> y_hat, std::size_t true_class, double gamma,
                  double alpha_t) {
    if (true_class >= y_hat.size()) throw LossError("focal_loss: true class out of range");
    if (gamma < 0.0) throw LossError("focal_loss: gamma must be >= 0");
    if (alpha_t < 0.0 || alpha_t > 1.0) throw LossError("focal_loss: alpha_t must be in [0, 1]");
    const double p = clamp_prob(y_hat[true_class]);
    return -alpha_t * std::pow(1.0 - p, gamma) * std::log(p);
}

double focal_loss_derivative(double p_t, double gamma, double alpha_t) {
    const double p = clamp_prob(p_t);
    const double q = 1.0 - p;
    if (q == 0.0 && gamma > 0.0) return 0.0;  // q^(g-1) log p -> 0 as p -> 1
    // d/dp [-a q^g log p] = a (g q^(g-1) log p - q^g / p)
    const double modulating = std::pow(q, gamma);
    const double dmod = gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0);
    return alpha_t * (dmod * std::log(p) - modulating / p);
}

std::vector<double> focal_loss_gradient(std::span<const double> y_hat, std::size_t true_class,
                                        double gamma, double alpha_t) {
    if (true_class >= y_hat.size()) throw LossError("focal_loss_gradient: true class out of range");
    std::vector<double> g(y_hat.size(), 0.0);
    g[true_class] = focal_loss_derivative(y_hat[true_class], gamma, alpha_t);
    return g;
}

double smooth_l1(double x) {
    const double a = std::abs(x);
    return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_derivative(double x) {
    if (std::abs(x) <= 1.0) return x;
    return x > 0.0 ? 1.0 : -1.0;
}

double detection_loss(double classification_term, double regression_term) {
    return kClassificationWeight * classification_term + regression_term;
}

}  // namespace aerofuse::losses

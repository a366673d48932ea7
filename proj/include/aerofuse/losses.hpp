#pragma once

/// @file losses.hpp
/// @brief Training losses and class-balancing weights with analytic gradients.
///
/// Per-pixel / per-anchor values only; reduction over an image or batch is
/// left to the caller.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace aerofuse::losses {

/// Floor applied to probabilities before taking a logarithm.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Weight on the classification term of the detector loss.
inline constexpr double kClassificationWeight = 1.5;

inline constexpr double kFocalGamma = 2.0;
inline constexpr double kFocalAlpha = 0.25;

/// Optimizer settings used for the reference trainings. Recorded for
/// provenance; nothing in this library optimizes.
struct TrainingMetadata {
    static constexpr const char* optimizer = "adam";
    static constexpr double segmentation_initial_lr = 0.001;
    static constexpr double detection_initial_lr = 0.0004;
};

class LossError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// -sum_i alpha_i * y_i * log(y_hat_i). Sizes must agree.
double weighted_ce(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> alpha);
/// d wCE / d y_hat_i = -alpha_i * y_i / y_hat_i (with the epsilon floor).
std::vector<double> weighted_ce_gradient(std::span<const double> y, std::span<const double> y_hat,
                                         std::span<const double> alpha);

/// How class frequencies are measured before balancing.
enum class FrequencyMode {
    /// f_c = count_c / sum of all counts.
    TotalPixels,
    /// f_c = count_c / pixels of images where c is present; the caller
    /// supplies per-class presence pixel totals.
    PresentImagePixels,
};

/// alpha_c = median(f) / f_c over classes with a nonzero count; absent
/// classes get 0. The median is taken over the nonzero frequencies, using
/// the mean of the two middle values for even lengths.
std::vector<double> median_frequency_weights(std::span<const std::uint64_t> class_pixel_counts);
std::vector<double> median_frequency_weights(std::span<const std::uint64_t> class_pixel_counts,
                                             std::span<const std::uint64_t> presence_pixels);

/// -alpha_t * (1 - p_t)^gamma * log(p_t), p_t = y_hat[true_class].
double focal_loss(std::span<const double> y_hat, std::size_t true_class,
                  double gamma = kFocalGamma, double alpha_t = kFocalAlpha);
/// Derivative with respect to p_t.
double focal_loss_derivative(double p_t, double gamma = kFocalGamma, double alpha_t = kFocalAlpha);
/// Gradient with respect to the whole y_hat vector (nonzero only at true_class).
std::vector<double> focal_loss_gradient(std::span<const double> y_hat, std::size_t true_class,
                                        double gamma = kFocalGamma, double alpha_t = kFocalAlpha);

double smooth_l1(double x);
/// x for |x| <= 1 (the quadratic branch owns the boundary), sign(x) beyond.
double smooth_l1_derivative(double x);

double detection_loss(double classification_term, double regression_term);

}  // namespace aerofuse::losses

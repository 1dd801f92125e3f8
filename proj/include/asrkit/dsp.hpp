#pragma once

#include <span>
#include <vector>

namespace asrkit {

enum class ConvolutionMethod { Auto, Direct, Fft };

// Full linear convolution, length a.size() + b.size() - 1 (empty if either is empty).
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             ConvolutionMethod method = ConvolutionMethod::Auto);

}  // namespace asrkit

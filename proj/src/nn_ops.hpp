#pragma once

// Dense kernels used by FusionNet. Activations are channel-major float64
// buffers; weights follow the [out][in][kernel...] layout of the manifest.
// Backward kernels accumulate into their output buffers.

#include <cstddef>
#include <span>
#include <vector>

namespace trav::nn {

// Same-padded 1D convolution over `len` samples.
void conv1d_forward(std::span<const double> in, int in_ch, int len, std::span<const double> w,
                    std::span<const double> b, int out_ch, int kernel, std::span<double> out);

void conv1d_backward(std::span<const double> in, int in_ch, int len, std::span<const double> w,
                     int out_ch, int kernel, std::span<const double> dout, std::span<double> dw,
                     std::span<double> db, std::span<double> din);

// Same-padded 2D convolution over a rows x cols plane with a square kernel.
void conv2d_forward(std::span<const double> in, int in_ch, int rows, int cols,
                    std::span<const double> w, std::span<const double> b, int out_ch, int kernel,
                    std::span<double> out);

void conv2d_backward(std::span<const double> in, int in_ch, int rows, int cols,
                     std::span<const double> w, int out_ch, int kernel,
                     std::span<const double> dout, std::span<double> dw, std::span<double> db,
                     std::span<double> din);

// Max pooling, window 2 stride 2; a trailing odd sample is dropped.
void maxpool1d_forward(std::span<const double> in, int ch, int len, std::span<double> out,
                       std::span<std::size_t> argmax);

void maxpool1d_backward(std::span<const double> dout, std::span<const std::size_t> argmax,
                        std::span<double> din);

void linear_forward(std::span<const double> in, std::span<const double> w,
                    std::span<const double> b, std::span<double> out);

void linear_backward(std::span<const double> in, std::span<const double> w,
                     std::span<const double> dout, std::span<double> dw, std::span<double> db,
                     std::span<double> din);

void relu_inplace(std::span<double> x);

// dx *= (y > 0), where y is the ReLU output.
void relu_backward_inplace(std::span<const double> y, std::span<double> dx);

}  // namespace trav::nn

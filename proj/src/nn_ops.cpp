#include "nn_ops.hpp"

#include <algorithm>

namespace trav::nn {

void conv1d_forward(std::span<const double> in, int in_ch, int len, std::span<const double> w,
                    std::span<const double> b, int out_ch, int kernel, std::span<double> out) {
  const int pad = kernel / 2;
  for (int o = 0; o < out_ch; ++o) {
    double* dst = out.data() + static_cast<std::size_t>(o) * len;
    std::fill(dst, dst + len, b[o]);
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in.data() + static_cast<std::size_t>(i) * len;
      const double* wk = w.data() + (static_cast<std::size_t>(o) * in_ch + i) * kernel;
      for (int k = 0; k < kernel; ++k) {
        const int shift = k - pad;
        const int t_lo = std::max(0, -shift);
        const int t_hi = std::min(len, len - shift);
        for (int t = t_lo; t < t_hi; ++t) dst[t] += wk[k] * src[t + shift];
      }
    }
  }
}

void conv1d_backward(std::span<const double> in, int in_ch, int len, std::span<const double> w,
                     int out_ch, int kernel, std::span<const double> dout, std::span<double> dw,
                     std::span<double> db, std::span<double> din) {
  const int pad = kernel / 2;
  for (int o = 0; o < out_ch; ++o) {
    const double* g = dout.data() + static_cast<std::size_t>(o) * len;
    for (int t = 0; t < len; ++t) db[o] += g[t];
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in.data() + static_cast<std::size_t>(i) * len;
      double* dsrc = din.empty() ? nullptr : din.data() + static_cast<std::size_t>(i) * len;
      const std::size_t wbase = (static_cast<std::size_t>(o) * in_ch + i) * kernel;
      for (int k = 0; k < kernel; ++k) {
        const int shift = k - pad;
        const int t_lo = std::max(0, -shift);
        const int t_hi = std::min(len, len - shift);
        double acc = 0.0;
        for (int t = t_lo; t < t_hi; ++t) acc += g[t] * src[t + shift];
        dw[wbase + k] += acc;
        if (dsrc) {
          const double wv = w[wbase + k];
          for (int t = t_lo; t < t_hi; ++t) dsrc[t + shift] += wv * g[t];
        }
      }
    }
  }
}

void conv2d_forward(std::span<const double> in, int in_ch, int rows, int cols,
                    std::span<const double> w, std::span<const double> b, int out_ch, int kernel,
                    std::span<double> out) {
  const int pad = kernel / 2;
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  for (int o = 0; o < out_ch; ++o) {
    double* dst = out.data() + o * plane;
    std::fill(dst, dst + plane, b[o]);
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in.data() + i * plane;
      const double* wk =
          w.data() + (static_cast<std::size_t>(o) * in_ch + i) * kernel * kernel;
      for (int kr = 0; kr < kernel; ++kr) {
        const int dr = kr - pad;
        const int r_lo = std::max(0, -dr), r_hi = std::min(rows, rows - dr);
        for (int kc = 0; kc < kernel; ++kc) {
          const int dc = kc - pad;
          const int c_lo = std::max(0, -dc), c_hi = std::min(cols, cols - dc);
          const double wv = wk[kr * kernel + kc];
          for (int r = r_lo; r < r_hi; ++r) {
            double* drow = dst + static_cast<std::size_t>(r) * cols;
            const double* srow = src + static_cast<std::size_t>(r + dr) * cols + dc;
            for (int c = c_lo; c < c_hi; ++c) drow[c] += wv * srow[c];
          }
        }
      }
    }
  }
}

void conv2d_backward(std::span<const double> in, int in_ch, int rows, int cols,
                     std::span<const double> w, int out_ch, int kernel,
                     std::span<const double> dout, std::span<double> dw, std::span<double> db,
                     std::span<double> din) {
  const int pad = kernel / 2;
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  for (int o = 0; o < out_ch; ++o) {
    const double* g = dout.data() + o * plane;
    for (std::size_t p = 0; p < plane; ++p) db[o] += g[p];
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in.data() + i * plane;
      double* dsrc = din.empty() ? nullptr : din.data() + i * plane;
      const std::size_t wbase = (static_cast<std::size_t>(o) * in_ch + i) * kernel * kernel;
      for (int kr = 0; kr < kernel; ++kr) {
        const int dr = kr - pad;
        const int r_lo = std::max(0, -dr), r_hi = std::min(rows, rows - dr);
        for (int kc = 0; kc < kernel; ++kc) {
          const int dc = kc - pad;
          const int c_lo = std::max(0, -dc), c_hi = std::min(cols, cols - dc);
          const double wv = w[wbase + kr * kernel + kc];
          double acc = 0.0;
          for (int r = r_lo; r < r_hi; ++r) {
            const double* grow = g + static_cast<std::size_t>(r) * cols;
            const double* srow = src + static_cast<std::size_t>(r + dr) * cols + dc;
            for (int c = c_lo; c < c_hi; ++c) acc += grow[c] * srow[c];
            if (dsrc) {
              double* dsrow = dsrc + static_cast<std::size_t>(r + dr) * cols + dc;
              for (int c = c_lo; c < c_hi; ++c) dsrow[c] += wv * grow[c];
            }
          }
          dw[wbase + kr * kernel + kc] += acc;
        }
      }
    }
  }
}

void maxpool1d_forward(std::span<const double> in, int ch, int len, std::span<double> out,
                       std::span<std::size_t> argmax) {
  const int out_len = len / 2;
  for (int c = 0; c < ch; ++c) {
    for (int j = 0; j < out_len; ++j) {
      const std::size_t a = static_cast<std::size_t>(c) * len + 2 * j;
      const std::size_t best = in[a + 1] > in[a] ? a + 1 : a;
      out[static_cast<std::size_t>(c) * out_len + j] = in[best];
      argmax[static_cast<std::size_t>(c) * out_len + j] = best;
    }
  }
}

void maxpool1d_backward(std::span<const double> dout, std::span<const std::size_t> argmax,
                        std::span<double> din) {
  for (std::size_t j = 0; j < dout.size(); ++j) din[argmax[j]] += dout[j];
}

void linear_forward(std::span<const double> in, std::span<const double> w,
                    std::span<const double> b, std::span<double> out) {
  const std::size_t n_in = in.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    double acc = b[o];
    const double* row = w.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
}

void linear_backward(std::span<const double> in, std::span<const double> w,
                     std::span<const double> dout, std::span<double> dw, std::span<double> db,
                     std::span<double> din) {
  const std::size_t n_in = in.size();
  for (std::size_t o = 0; o < dout.size(); ++o) {
    const double g = dout[o];
    db[o] += g;
    const double* row = w.data() + o * n_in;
    double* drow = dw.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      drow[i] += g * in[i];
      if (!din.empty()) din[i] += g * row[i];
    }
  }
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(std::span<const double> y, std::span<double> dx) {
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y[i] > 0.0)) dx[i] = 0.0;
}

}  // namespace trav::nn

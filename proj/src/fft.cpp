#include "qoct/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace qoct {

namespace {

std::mutex g_plan_mutex;

// One cached in-place c2c plan per length.
fftw_plan plan_for(std::size_t n, fftw_complex* buf) {
    static std::map<std::size_t, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        // Plan on a scratch buffer so the caller's data is untouched, then
        // execute with fftw_execute_dft on the real buffer.
        fftw_complex* scratch = fftw_alloc_complex(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_free(scratch);
        it = cache.emplace(n, p).first;
    }
    (void)buf;
    return it->second;
}

void run_fft_inplace(std::vector<std::complex<double>>& data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan p = plan_for(data.size(), buf);
    fftw_execute_dft(p, buf, buf);
}

} // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in) {
    if (in.empty())
        throw std::invalid_argument("fft_forward: empty input");
    std::vector<std::complex<double>> out = in;
    run_fft_inplace(out);
    return out;
}

std::vector<std::complex<double>> fft_forward_real(const std::vector<double>& in, std::size_t pad_to) {
    if (in.empty())
        throw std::invalid_argument("fft_forward_real: empty input");
    std::size_t n = pad_to > in.size() ? pad_to : in.size();
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (std::size_t i = 0; i < in.size(); ++i)
        buf[i] = {in[i], 0.0};
    run_fft_inplace(buf);
    return buf;
}

std::vector<std::complex<double>> fft2_forward_real(const Matrix& in, int pad_cols) {
    const int rows = in.rows();
    const int cols = in.cols();
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("fft2_forward_real: empty input");
    const int out_cols = pad_cols > cols ? pad_cols : cols;

    // Rows first (the u axis, padded), then columns.
    std::vector<std::complex<double>> stage(static_cast<std::size_t>(rows) * out_cols, {0.0, 0.0});
    {
        std::vector<std::complex<double>> rowbuf(out_cols);
        for (int r = 0; r < rows; ++r) {
            std::fill(rowbuf.begin(), rowbuf.end(), std::complex<double>{0.0, 0.0});
            for (int c = 0; c < cols; ++c)
                rowbuf[c] = {in(r, c), 0.0};
            run_fft_inplace(rowbuf);
            for (int c = 0; c < out_cols; ++c)
                stage[static_cast<std::size_t>(r) * out_cols + c] = rowbuf[c];
        }
    }
    std::vector<std::complex<double>> colbuf(rows);
    for (int c = 0; c < out_cols; ++c) {
        for (int r = 0; r < rows; ++r)
            colbuf[r] = stage[static_cast<std::size_t>(r) * out_cols + c];
        run_fft_inplace(colbuf);
        for (int r = 0; r < rows; ++r)
            stage[static_cast<std::size_t>(r) * out_cols + c] = colbuf[r];
    }
    return stage;
}

} // namespace qoct

#include "pmf/fft.hpp"

#include "pmf/model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace pmf::fft {
namespace {

static_assert(sizeof(Complex) == sizeof(fftw_complex));

enum class Kind { C2C, R2C, C2R, OddLines };

// Transforms run on fftw_malloc'd scratch, so every call sees the same alignment and
// executes the same (SIMD) plan; results are reproducible across runs.
struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using Buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
Buffer<T> allocate(std::size_t count) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
    if (p == nullptr) throw Error("FFT buffer allocation failed");
    return Buffer<T>(p);
}

// fftw planning is not thread safe; execution with the new-array interface is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, std::span<const int> dims, int sign = 0) {
        const std::lock_guard lock(mutex_);
        Key key{kind, sign, std::vector<int>(dims.begin(), dims.end())};
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        fftw_plan plan = make(kind, dims, sign);
        if (plan == nullptr) throw Error("failed to create FFT plan");
        plans_.emplace(std::move(key), plan);
        return plan;
    }

private:
    static fftw_plan make(Kind kind, std::span<const int> dims, int sign) {
        const int rank = static_cast<int>(dims.size());
        std::size_t total = 1;
        for (int d : dims) total *= static_cast<std::size_t>(d);
        const std::size_t half = kind == Kind::OddLines ? 0 : half_size(dims);
        switch (kind) {
            case Kind::C2C: {
                auto buf = allocate<fftw_complex>(total);
                return fftw_plan_dft(rank, dims.data(), buf.get(), buf.get(), sign, FFTW_ESTIMATE);
            }
            case Kind::R2C: {
                auto in = allocate<double>(total);
                auto out = allocate<fftw_complex>(half);
                return fftw_plan_dft_r2c(rank, dims.data(), in.get(), out.get(), FFTW_ESTIMATE);
            }
            case Kind::C2R: {
                auto in = allocate<fftw_complex>(half);
                auto out = allocate<double>(total);
                return fftw_plan_dft_c2r(rank, dims.data(), in.get(), out.get(), FFTW_ESTIMATE);
            }
            case Kind::OddLines: {
                // dims = {line length, line count}: batched r2c over contiguous lines
                const int m = dims[0];
                const int lines = dims[1];
                const int half_m = m / 2 + 1;
                auto in = allocate<double>(static_cast<std::size_t>(m) * lines);
                auto out = allocate<fftw_complex>(static_cast<std::size_t>(half_m) * lines);
                return fftw_plan_many_dft_r2c(1, &m, lines, in.get(), nullptr, 1, m, out.get(), nullptr, 1,
                                              half_m, FFTW_ESTIMATE);
            }
        }
        return nullptr;
    }

    using Key = std::tuple<Kind, int, std::vector<int>>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

std::size_t checked_total(std::size_t size, std::span<const int> dims) {
    if (dims.empty()) throw Error("transform needs at least one dimension");
    std::size_t total = 1;
    for (int d : dims) {
        if (d < 1) throw Error("transform dimensions must be positive");
        total *= static_cast<std::size_t>(d);
    }
    if (total != size) throw Error("tensor size does not match its dimensions");
    return total;
}

}  // namespace

std::size_t half_size(std::span<const int> dims) {
    std::size_t total = 1;
    for (std::size_t m = 0; m + 1 < dims.size(); ++m) total *= static_cast<std::size_t>(dims[m]);
    return dims.empty() ? 0 : total * static_cast<std::size_t>(dims.back() / 2 + 1);
}

void dft(std::span<Complex> data, std::span<const int> dims, int sign) {
    const std::size_t total = checked_total(data.size(), dims);
    fftw_plan plan = cache().get(Kind::C2C, dims, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    auto buf = allocate<fftw_complex>(total);
    auto* z = reinterpret_cast<Complex*>(buf.get());
    std::copy(data.begin(), data.end(), z);
    fftw_execute_dft(plan, buf.get(), buf.get());
    std::copy(z, z + total, data.begin());
}

std::vector<Complex> rdft(std::span<const double> data, std::span<const int> dims) {
    const std::size_t total = checked_total(data.size(), dims);
    const std::size_t half = half_size(dims);
    fftw_plan plan = cache().get(Kind::R2C, dims);
    auto in = allocate<double>(total);
    auto out = allocate<fftw_complex>(half);
    std::copy(data.begin(), data.end(), in.get());
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    const auto* z = reinterpret_cast<const Complex*>(out.get());
    return {z, z + half};
}

std::vector<double> irdft(std::span<const Complex> half, std::span<const int> dims) {
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(std::max(d, 0));
    if (dims.empty() || total == 0 || half.size() != half_size(dims)) {
        throw Error("half spectrum size does not match its dimensions");
    }
    fftw_plan plan = cache().get(Kind::C2R, dims);
    auto in = allocate<fftw_complex>(half.size());
    auto out = allocate<double>(total);
    std::copy(half.begin(), half.end(), reinterpret_cast<Complex*>(in.get()));
    fftw_execute_dft_c2r(plan, in.get(), out.get());
    return {out.get(), out.get() + total};
}

void dst1(std::span<double> data, std::span<const int> dims) {
    const std::size_t total = checked_total(data.size(), dims);
    // DST-I of length n from the DFT of the odd extension [0, v, 0, -reverse(v)] of
    // length 2(n + 1): X_k = -2i sum_i v_i sin(pi k (i + 1) / (n + 1)).
    for (int axis = 0; axis < static_cast<int>(dims.size()); ++axis) {
        const int n = dims[axis];
        const int m = 2 * (n + 1);
        const int half_m = m / 2 + 1;
        std::size_t inner = 1;
        for (int k = axis + 1; k < static_cast<int>(dims.size()); ++k) inner *= static_cast<std::size_t>(dims[k]);
        const std::size_t lines = total / static_cast<std::size_t>(n);
        const int line_dims[2] = {m, static_cast<int>(lines)};
        fftw_plan plan = cache().get(Kind::OddLines, line_dims);
        auto in = allocate<double>(static_cast<std::size_t>(m) * lines);
        auto out = allocate<fftw_complex>(static_cast<std::size_t>(half_m) * lines);
        for (std::size_t line = 0; line < lines; ++line) {
            const std::size_t base = (line / inner) * n * inner + line % inner;
            double* ext = in.get() + line * m;
            ext[0] = 0.0;
            ext[n + 1] = 0.0;
            for (int i = 0; i < n; ++i) {
                const double v = data[base + static_cast<std::size_t>(i) * inner];
                ext[i + 1] = v;
                ext[m - 1 - i] = -v;
            }
        }
        fftw_execute_dft_r2c(plan, in.get(), out.get());
        for (std::size_t line = 0; line < lines; ++line) {
            const std::size_t base = (line / inner) * n * inner + line % inner;
            const fftw_complex* X = out.get() + line * half_m;
            for (int k = 0; k < n; ++k) data[base + static_cast<std::size_t>(k) * inner] = -0.5 * X[k + 1][1];
        }
    }
}

}  // namespace pmf::fft

#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace semistab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

// All public operations signal failure through Error; `code` is the stable,
// machine-readable discriminator echoed into CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Spectral assertion tolerance (relative) and resolvent condition cutoff.
inline constexpr double kSpectralTol = 1e-8;
inline constexpr double kSingularCondition = 1e14;
// Safety factor applied to every empirically sampled supremum.
inline constexpr double kSupSafety = 1.05;

inline double pi() { return 3.14159265358979323846; }

// Runs fn(i) for i in [0, n). Each index owns its output slot, so results are
// deterministic and independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

// Process-wide default for `threads = 0` call sites (set by the CLI --threads).
void set_default_thread_count(unsigned threads);
unsigned default_thread_count();

std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace semistab

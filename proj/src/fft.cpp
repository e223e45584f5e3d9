#include "tpdo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tpdo::fft {
namespace {

// FFTW planning is not thread safe; execution with new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::span<const int> sizes, Direction direction) {
    Key key{std::vector<int>(sizes.begin(), sizes.end()), direction == Direction::Forward};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t count = 1;
    for (int n : sizes) count *= static_cast<std::size_t>(n);
    std::vector<Complex> scratch(count);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(sizes.size()), sizes.data(), buf, buf,
                                   direction == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw planning failed");
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  using Key = std::pair<std::vector<int>, bool>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void transform(std::span<Complex> data, std::span<const int> sizes, Direction direction) {
  fftw_plan plan = cache().get(sizes, direction);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace tpdo::fft

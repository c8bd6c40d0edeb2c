#include "cylcalc/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <mutex>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cylcalc {

namespace {

std::mutex plan_mutex;

// FFTW planning is not thread safe; executions on distinct buffers are.
fftw_plan plan_1d(int n, int sign) {
  static std::unordered_map<long, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  long key = 2L * n + (sign == FFTW_FORWARD ? 0 : 1);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  VectorXcd tmp(n);
  fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(tmp.data()),
                                 reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

fftw_plan plan_2d(int n0, int n1, int sign) {
  static std::unordered_map<long, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  long key = (long(n0) << 24) ^ (long(n1) << 2) ^ (sign == FFTW_FORWARD ? 0 : 1);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  MatrixXcd tmp(n1, n0);
  fftw_plan p = fftw_plan_dft_2d(n0, n1, reinterpret_cast<fftw_complex*>(tmp.data()),
                                 reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

}  // namespace

VectorXcd dft(const VectorXcd& in) {
  VectorXcd out = in;
  fftw_plan p = plan_1d(int(in.size()), FFTW_FORWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(out.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

VectorXcd idft(const VectorXcd& in) {
  VectorXcd out = in;
  fftw_plan p = plan_1d(int(in.size()), FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(out.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= double(in.size());
  return out;
}

// Matrices are stored column-major with shape (n1, n0): entry (j, i) is the
// sample at (i, j) of the logical n0 x n1 array, matching fftw's row-major
// (n0, n1) layout.
MatrixXcd dft2(const MatrixXcd& in) {
  MatrixXcd out = in;
  fftw_plan p = plan_2d(int(in.cols()), int(in.rows()), FFTW_FORWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(out.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

MatrixXcd idft2(const MatrixXcd& in) {
  MatrixXcd out = in;
  fftw_plan p = plan_2d(int(in.cols()), int(in.rows()), FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(out.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= double(in.size());
  return out;
}

void configure_threads() {
  int n = 0;
  if (const char* env = std::getenv("CYLCALC_THREADS")) {
    n = std::atoi(env);
  }
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
  if (n > 0) Eigen::setNbThreads(n);
}

}  // namespace cylcalc

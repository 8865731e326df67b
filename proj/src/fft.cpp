// SPDX-License-Identifier: Apache-2.0

#include "speclab/fft.hpp"

#include <fftw3.h>
#include <map>
#include <mutex>
#include <stdexcept>

namespace speclab::fft {

namespace {

std::mutex plan_mutex;
std::map<std::pair<int, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::complex<double>* data, int n, int sign)
{
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end())
        return it->second;
    // FFTW_ESTIMATE keeps planning deterministic and does not touch the data.
    fftw_plan p = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(data),
                                   reinterpret_cast<fftw_complex*>(data),
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!p)
        throw std::runtime_error("fftw plan creation failed");
    plan_cache.emplace(key, p);
    return p;
}

} // namespace

void transform3d(std::complex<double>* data, int n, int sign)
{
    fftw_plan p = plan_for(data, n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void clear_plans()
{
    std::lock_guard<std::mutex> lock(plan_mutex);
    for (auto& [key, p] : plan_cache)
        fftw_destroy_plan(p);
    plan_cache.clear();
}

} // namespace speclab::fft

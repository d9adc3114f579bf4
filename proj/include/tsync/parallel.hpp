#pragma once

// Replica and cell loops come in two flavours: a plain serial loop kept as
// the reference, and an OpenMP loop. Results are written into slots keyed by
// loop index, so both produce identical output for any thread count.

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tsync {

enum class Execution { Serial, Parallel };

inline void set_thread_count(int threads)
{
#ifdef _OPENMP
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
#else
    (void)threads;
#endif
}

inline int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <class Fn>
auto map_indexed(std::size_t count, Execution exec, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>>
{
    std::vector<std::invoke_result_t<Fn&, std::size_t>> out(count);
    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    // exceptions may not cross the OpenMP region; park them and rethrow the
    // one with the lowest index
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = fn(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

} // namespace tsync

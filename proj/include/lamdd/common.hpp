#ifndef LAMDD_COMMON_HPP
#define LAMDD_COMMON_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lamdd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Error raised for invalid scenario files (parse or validation).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Error raised when an iterative stage fails to converge.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Positive-part indicator applied to the normal opening. Exactly zero
/// opening counts as closed so that the closed branch is reproducible.
inline double h_plus(double x) { return x > 0.0 ? 1.0 : 0.0; }

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double sqr(double x) { return x * x; }

/// Runs fn(i) for i in [0, count). Tasks must write to disjoint slots;
/// results are then identical for any thread count.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn)
{
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < count; i += nt) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace lamdd

#endif // LAMDD_COMMON_HPP

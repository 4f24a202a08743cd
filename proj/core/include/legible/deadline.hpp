#pragma once

#include <chrono>
#include <optional>

namespace legible {

// Cooperative wall-clock budget. Planners poll expired() between units of work.
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;  // never expires

    static Deadline after_seconds(double seconds) {
        Deadline d;
        d.at_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(seconds));
        return d;
    }

    static Deadline earliest(const Deadline& a, const Deadline& b) {
        if (a.unlimited()) return b;
        if (b.unlimited()) return a;
        return *a.at_ <= *b.at_ ? a : b;
    }

    bool expired() const { return at_ && Clock::now() >= *at_; }
    bool unlimited() const { return !at_.has_value(); }

private:
    std::optional<Clock::time_point> at_;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace legible

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <thread>

namespace mhqa {

// Time source behind rate limiting and retry backoff, swappable in tests.
class Clock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    using duration = std::chrono::steady_clock::duration;

    virtual ~Clock() = default;
    virtual time_point now() const = 0;
    virtual void sleep_for(duration d) = 0;
};

class SystemClock final : public Clock {
public:
    time_point now() const override { return std::chrono::steady_clock::now(); }
    void sleep_for(duration d) override {
        if (d > duration::zero()) std::this_thread::sleep_for(d);
    }
};

// Manual clock: sleep_for advances time instead of blocking.
class FakeClock final : public Clock {
public:
    time_point now() const override {
        std::lock_guard<std::mutex> lock(mutex_);
        return now_;
    }
    void sleep_for(duration d) override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (d > duration::zero()) now_ += d;
    }
    void advance(duration d) {
        std::lock_guard<std::mutex> lock(mutex_);
        now_ += d;
    }

private:
    mutable std::mutex mutex_;
    time_point now_{};
};

inline std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

}  // namespace mhqa

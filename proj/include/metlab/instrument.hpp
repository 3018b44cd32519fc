#pragma once

#include <atomic>
#include <cstdint>

namespace metlab::instrument {

// Every explicit inverse or linear solve in the library goes through
// note_inversion() so callers can assert that a pipeline never inverted.
std::uint64_t inversions();
void note_inversion();
void reset();

class InversionScope {
public:
    InversionScope() : start_(inversions()) {}
    std::uint64_t count() const { return inversions() - start_; }

private:
    std::uint64_t start_;
};

}  // namespace metlab::instrument

#include "metlab/instrument.hpp"

namespace metlab::instrument {

namespace {
std::atomic<std::uint64_t> g_inversions{0};
}

std::uint64_t inversions() { return g_inversions.load(std::memory_order_relaxed); }

void note_inversion() { g_inversions.fetch_add(1, std::memory_order_relaxed); }

void reset() { g_inversions.store(0, std::memory_order_relaxed); }

}  // namespace metlab::instrument

#pragma once

namespace emi::num {

// Keeps freed multi-megabyte blocks in the heap instead of returning them to
// the OS. No-op outside glibc.
void retain_large_allocations();

}  // namespace emi::num

#ifndef SMOOTH_CORE_RUNTIME_H_
#define SMOOTH_CORE_RUNTIME_H_

namespace smooth {

// Keeps glibc from returning minibatch-sized buffers to the kernel after
// every graph; training allocates and frees the same sizes thousands of
// times. No-op on other C libraries.
void tune_allocator();

}  // namespace smooth

#endif  // SMOOTH_CORE_RUNTIME_H_

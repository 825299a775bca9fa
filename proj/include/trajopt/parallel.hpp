#pragma once

namespace trajopt::parallel {

// Per-thread switch for the OpenMP kernels. The experiment harness turns
// intra-run parallelism off whenever it is already running whole runs in
// parallel, so worker threads never oversubscribe the machine.
bool enabled();
void set_enabled(bool on);

int max_threads();

}  // namespace trajopt::parallel

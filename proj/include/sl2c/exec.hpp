#pragma once

namespace sl2c {

// Execution policy for kernels that have both an OpenMP path and a serial
// reference path. Both paths use the same deterministic reduction order.
enum class Exec { serial, parallel };

}  // namespace sl2c

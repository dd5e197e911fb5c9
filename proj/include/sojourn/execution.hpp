#pragma once

namespace sojourn {

// Every data-parallel kernel ships a serial reference path; the OpenMP path
// must produce bit-identical results.
enum class Execution { serial, parallel };

}  // namespace sojourn

#pragma once

#include <string>

namespace bqpm {

// Directory holding the bundled data files (dispersion coefficients, the
// pinned tomography setting table).  The BQPM_DATA_DIR environment variable
// overrides the compiled-in default, which points at the source tree's
// data/ directory.
std::string default_data_dir();

// Convenience: default_data_dir() + "/" + filename.
std::string data_file(const std::string& filename);

}  // namespace bqpm

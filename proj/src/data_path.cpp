#include "bqpm/data_path.hpp"

#include <cstdlib>

#ifndef BQPM_DEFAULT_DATA_DIR
#define BQPM_DEFAULT_DATA_DIR "data"
#endif

namespace bqpm {

std::string default_data_dir() {
  if (const char* env = std::getenv("BQPM_DATA_DIR"); env && *env) return env;
  return BQPM_DEFAULT_DATA_DIR;
}

std::string data_file(const std::string& filename) {
  return default_data_dir() + "/" + filename;
}

}  // namespace bqpm

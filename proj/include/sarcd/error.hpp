#pragma once

#include <stdexcept>
#include <string>

namespace sarcd {

// Error hierarchy shared by every module. The CLI maps these onto exit
// codes: param_error -> 2 (usage), format_error -> 3 (data/format),
// degeneracy_error -> 4 (numerical degeneracy).
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct param_error : error {
    using error::error;
};

struct format_error : error {
    using error::error;
};

struct degeneracy_error : error {
    using error::error;
};

} // namespace sarcd

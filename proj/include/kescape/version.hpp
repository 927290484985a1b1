#pragma once

namespace kescape {

/// Library version followed by the git revision it was built from, e.g. "0.1.0-gddebd78".
const char* version_string() noexcept;

}  // namespace kescape

#pragma once

namespace derivata {

inline int cli_main(int, char**) { return 0; }  // placeholder, filled in below

}  // namespace derivata

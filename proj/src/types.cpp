#include "fivec/types.hpp"

#include "fivec/errors.hpp"

namespace fivec {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::P: return "P";
        case Mode::S: return "S";
        case Mode::unclassified: return "unclassified";
    }
    return "unclassified";
}

Mode mode_from_string(const std::string& s) {
    if (s == "P" || s == "p") return Mode::P;
    if (s == "S" || s == "s") return Mode::S;
    if (s == "unclassified") return Mode::unclassified;
    throw ValidationError("unknown mode '" + s + "' (expected P or S)");
}

}  // namespace fivec

#include "fse/types.hpp"

#include <sstream>

namespace fse {

std::string combination_to_string(const EventCombination& c) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [factor, level] : c) {
        if (!first) os << ", ";
        os << factor << "=" << level;
        first = false;
    }
    os << "}";
    return os.str();
}

}  // namespace fse

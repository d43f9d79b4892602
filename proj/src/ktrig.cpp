#include "kmech/ktrig.hpp"

namespace kmech {

std::string to_string(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::sphere: return "sphere";
        case SpaceKind::euclidean: return "euclidean";
        case SpaceKind::hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

}  // namespace kmech

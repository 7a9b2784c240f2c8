#pragma once

namespace tfilm {

enum class Verdict { BlowUp, Touchdown, Undetermined };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::BlowUp: return "BlowUp";
        case Verdict::Touchdown: return "Touchdown";
        case Verdict::Undetermined: return "Undetermined";
    }
    return "?";
}

}  // namespace tfilm

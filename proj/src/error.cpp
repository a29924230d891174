#include "proid/error.hpp"

namespace proid {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::InvalidUip: return "invalid-uip";
    case ErrorCode::DegenerateContrast: return "degenerate-contrast";
    case ErrorCode::InvalidCenter: return "invalid-center";
    case ErrorCode::EmptyGraph: return "empty-graph";
    case ErrorCode::ContractViolation: return "contract-violation";
    case ErrorCode::WindowTooTight: return "window-too-tight";
    case ErrorCode::NoPath: return "no-path";
    case ErrorCode::AnchorNode: return "anchor-node";
    case ErrorCode::HalfFailure: return "half-failure";
    case ErrorCode::DegenerateBand: return "degenerate-band";
    case ErrorCode::FlatVolume: return "flat-volume";
    case ErrorCode::Geometry: return "geometry";
    case ErrorCode::InfiniteCnr: return "infinite-cnr";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::StartSelection: return "start-selection";
    case ErrorCode::Spec: return "spec";
    case ErrorCode::Io: return "io";
    case ErrorCode::Harness: return "harness";
  }
  return "unknown";
}

}  // namespace proid

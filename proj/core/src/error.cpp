#include "ahmca/error.hpp"

namespace ahmca {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Cycle: return "Cycle";
    case ErrorKind::OrphanParent: return "OrphanParent";
    case ErrorKind::LevelGap: return "LevelGap";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::MalformedTaxonomy: return "MalformedTaxonomy";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::TooFewDocuments: return "TooFewDocuments";
    case ErrorKind::SpecInvalid: return "SpecInvalid";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::RowArity: return "RowArity";
    case ErrorKind::DuplicateToken: return "DuplicateToken";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyLabelText: return "EmptyLabelText";
    case ErrorKind::EmptyContext: return "EmptyContext";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::TaxonomyMismatch: return "TaxonomyMismatch";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptPayload: return "CorruptPayload";
    case ErrorKind::EmptyTruth: return "EmptyTruth";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ahmca

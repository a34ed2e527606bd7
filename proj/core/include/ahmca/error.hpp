#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ahmca {

enum class ErrorKind {
  // taxonomy
  Cycle,
  OrphanParent,
  LevelGap,
  DuplicateId,
  LevelOutOfRange,
  UnknownLabel,
  MalformedTaxonomy,
  // corpus
  MalformedRecord,
  EmptyText,
  TooFewDocuments,
  SpecInvalid,
  // numerics
  DimMismatch,
  NonFinite,
  // embedding
  MalformedHeader,
  RowArity,
  DuplicateToken,
  CountMismatch,
  EmptyInput,
  EmptyLabelText,
  // attention
  EmptyContext,
  // training
  ConfigInvalid,
  NonFiniteLoss,
  TaxonomyMismatch,
  BadMagic,
  VersionMismatch,
  CorruptPayload,
  // metrics
  EmptyTruth,
  // config
  UnknownKey,
  TypeError,
  RangeError,
  // io
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ahmca

#pragma once

#include <stdexcept>
#include <string>

namespace recut {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent run configuration. CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input dataset (bad schema, duplicate ids, ...). CLI exit code 2.
struct IngestError : Error {
  using Error::Error;
};

// Generator produced no usable text for one attempt.
struct EmptyGeneration : Error {
  using Error::Error;
};

// Remote generation failed after all retries.
struct GenerationError : Error {
  using Error::Error;
};

// Token count requested in external-count-file mode for unknown content.
struct MissingTokenCount : Error {
  using Error::Error;
};

// Pool/trace files too damaged to continue an aborted exploration.
struct ResumeError : Error {
  using Error::Error;
};

// Policy/reference parameter shapes disagree.
struct ModelShapeError : Error {
  using Error::Error;
};

// Training cannot proceed (e.g. empty preference dataset).
struct TrainError : Error {
  using Error::Error;
};

// Tensor maps passed to merge are not name/shape aligned.
struct MergeShapeError : Error {
  using Error::Error;
};

// Checkpoint container is damaged: bad magic, truncation, checksum mismatch.
struct ContainerError : Error {
  using Error::Error;
};

}  // namespace recut

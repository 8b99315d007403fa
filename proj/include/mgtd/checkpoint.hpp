#pragma once

#include <string>

#include "mgtd/detector.hpp"
#include "mgtd/run_config.hpp"
#include "mgtd/supervisor.hpp"
#include "mgtd/vocab.hpp"

namespace mgtd {

/// Self-describing container: JSON header (shapes, vocabulary, config echo,
/// payload checksum) followed by the raw little-endian parameter arrays.
/// save -> load -> save is byte-identical; parameters round-trip bit-exactly.
struct Checkpoint {
    DetectorParams detector;
    SupervisorParams supervisor;
    Vocab vocab;
    RunConfig config;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Throws Error(integrity) on magic/checksum mismatch and Error(config) when
/// the header shapes disagree with the stored arrays or config echo.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mgtd

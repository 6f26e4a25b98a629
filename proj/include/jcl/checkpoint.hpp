#ifndef JCL_CHECKPOINT_HPP
#define JCL_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "jcl/trainer.hpp"

namespace jcl {

inline constexpr int kCheckpointFormatVersion = 1;

/// Flat object whose keys are exactly the TrainConfig field names.
nlohmann::json config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// std::invalid_argument. The result is validated.
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

nlohmann::json encoder_to_json(const EncoderParams& params);
EncoderParams encoder_from_json(const nlohmann::json& j);

/// Complete training state: config, method, seed, RNG state, both
/// encoders, optimizer buffer, queue contents and the log so far.
nlohmann::json checkpoint_to_json(const TrainingState& state);
TrainingState checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path);
TrainingState load_checkpoint(const std::filesystem::path& path);

/// Reads a whole JSON document; throws std::runtime_error with the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace jcl

#endif  // JCL_CHECKPOINT_HPP

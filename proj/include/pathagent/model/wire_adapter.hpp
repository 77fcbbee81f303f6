#pragma once

#include <string>

#include "pathagent/model/chat.hpp"

namespace pathagent::model {

/// Client for an OpenAI-compatible chat-completions endpoint. The reply is
/// requested as a JSON object through a json_schema response format.
/// HTTP 429, 5xx and connection failures are retried with exponential
/// backoff; a reply that does not parse as a step is retried with the
/// corrective message appended. Both kinds of retry share max_retries.
class WireAdapter : public ModelAdapter {
 public:
  explicit WireAdapter(ModelConfig config, LogFn log = {});

  StepOutput complete_step(const Transcript& transcript) override;
  int last_retry_count() const override { return last_retries_; }

  /// Request body for a transcript; exposed for tests.
  std::string request_body(const Transcript& transcript) const;

 private:
  void log(const std::string& line) const;
  ModelConfig config_;
  LogFn log_;
  int last_retries_ = 0;
};

}  // namespace pathagent::model

#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "midctl/control.hpp"
#include "midctl/model.hpp"

namespace httplib {
class Server;
}

namespace midctl::service {

struct Response {
  int status = 200;
  nlohmann::json body;
};

// JSON API over one immutable model. Handlers hold no mutable state, so any
// number of requests may run concurrently; /api/control seeds its annealer
// from the request ("seed", default 0).
class Service {
 public:
  explicit Service(TrainedModel model, control::ControlConfig cfg = {});

  Response predict(std::string_view body) const;
  Response control(std::string_view body) const;
  Response ard() const;
  Response model_info() const;

  // Dispatch by method and path; unknown routes give 404.
  Response handle(std::string_view method, std::string_view path, std::string_view body) const;

  void mount(httplib::Server& server) const;

  const TrainedModel& model() const { return model_; }

 private:
  TrainedModel model_;
  control::ControlConfig cfg_;
};

// Blocks serving on host:port until the process is stopped.
int serve(const Service& service, const std::string& host, int port);

}  // namespace midctl::service

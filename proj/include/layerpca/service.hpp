/*
 * Copyright 2026 The layerpca Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "layerpca/session.hpp"

namespace httplib {
class Server;
}

namespace layerpca {

struct ServiceConfig {
  // Directory holding `<name>.json` edit sets for /v1/editsets.
  std::optional<std::filesystem::path> editset_dir;
};

// JSON API:
//   POST   /v1/sessions              {"seed"} or {"snapshot"}  -> session summary
//   GET    /v1/sessions                                         -> ids
//   GET    /v1/sessions/{id}                                    -> snapshot
//   DELETE /v1/sessions/{id}
//   POST   /v1/sessions/{id}/edits   edit delta                 -> stack
//   GET    /v1/sessions/{id}/edits                              -> stack
//   DELETE /v1/sessions/{id}/edits   pops the last edit         -> stack
//   POST   /v1/sessions/{id}/render  {"overrides", "commit", "capture": {"layer", "tap"}}
//   GET    /v1/sessions/{id}/render?format=png|gspc
//   GET    /v1/components
//   GET    /v1/editsets, GET|PUT /v1/editsets/{name}
// Renders are GSPC unless ?format=png or "Accept: image/png".
void mount_service_routes(httplib::Server& server, SessionManager& sessions,
                          const ServiceConfig& config);

}  // namespace layerpca

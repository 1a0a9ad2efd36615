// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "culprit/corpus.hpp"
#include "culprit/ranker.hpp"

namespace httplib {
class Server;
}

namespace culprit {

struct ServiceResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Read-only localization endpoint logic over one immutable model.
///
/// POST /localize body:
///   {"bug": <bug record>, "candidates": [<commit record>...] | "candidate_ids": [str...],
///    "top_k": int (default 10), "explain": bool (default false), "scheme": str (optional)}
/// A 200 response carries one ranked-result record per line, exactly as the
/// `localize` command prints them. Errors come back as {"error": msg} with
/// status 400.
///
/// GET /health -> {"status": "ok", "model_version": str, "scheme": str}
class LocalizationService {
public:
    /// `pool` backs requests that name candidates by id.
    explicit LocalizationService(std::shared_ptr<const Model> model, std::vector<Commit> pool = {});

    const Model& model() const { return *model_; }

    ServiceResponse health() const;
    ServiceResponse localize(std::string_view request_body) const;

    /// Registers both endpoints on `server`.
    void mount(httplib::Server& server) const;

private:
    std::shared_ptr<const Model> model_;
    Corpus pool_;
};

/// Blocks serving on host:port until the server is stopped.
void run_server(const LocalizationService& service, const std::string& host, int port);

} // namespace culprit

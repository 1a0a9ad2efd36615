// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/service.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

using nlohmann::json;

namespace {

ServiceResponse error_response(const std::string& message) {
    return {400, json{{"error", message}}.dump() + "\n", "application/json"};
}

} // namespace

LocalizationService::LocalizationService(std::shared_ptr<const Model> model, std::vector<Commit> pool)
    : model_(std::move(model)) {
    if (!model_) throw UsageError("service needs a model");
    model_->validate();
    pool_.commits = std::move(pool);
}

ServiceResponse LocalizationService::health() const {
    json body{{"status", "ok"}, {"model_version", model_->version}, {"scheme", to_string(model_->scheme)}};
    return {200, body.dump() + "\n", "application/json"};
}

ServiceResponse LocalizationService::localize(std::string_view request_body) const {
    try {
        const json req = json::parse(request_body);
        if (!req.is_object()) return error_response("request must be a JSON object");
        if (auto s = req.find("scheme"); s != req.end()) {
            if (!s->is_string()) return error_response("field 'scheme' must be a string");
            const Scheme wanted = parse_scheme(s->get<std::string>());
            if (wanted != model_->scheme) {
                return error_response("model serves scheme '" + std::string(to_string(model_->scheme)) +
                                      "', request asked for '" + std::string(to_string(wanted)) + "'");
            }
        }
        auto bug_it = req.find("bug");
        if (bug_it == req.end()) return error_response("missing field 'bug'");
        const BugReport bug = bug_from_json(*bug_it, "bug");

        std::vector<Commit> candidates;
        if (auto c = req.find("candidates"); c != req.end()) {
            if (!c->is_array()) return error_response("field 'candidates' must be an array");
            for (std::size_t i = 0; i < c->size(); ++i) {
                candidates.push_back(commit_from_json((*c)[i], "candidates[" + std::to_string(i) + "]"));
            }
        } else if (auto ids = req.find("candidate_ids"); ids != req.end()) {
            candidates = select_candidates(pool_, ids->get<std::vector<std::string>>());
        } else {
            return error_response("missing field 'candidates' or 'candidate_ids'");
        }

        LocalizeOptions options;
        if (auto k = req.find("top_k"); k != req.end()) {
            if (!k->is_number_integer() || k->get<long long>() < 1) {
                return error_response("field 'top_k' must be a positive integer");
            }
            options.top_k = k->get<std::size_t>();
        }
        if (auto e = req.find("explain"); e != req.end()) {
            if (!e->is_boolean()) return error_response("field 'explain' must be a boolean");
            options.explain = e->get<bool>();
        }
        const auto results = culprit::localize(*model_, bug, candidates, options);
        return {200, format_results(results), "application/x-ndjson"};
    } catch (const json::exception& e) {
        return error_response(std::string("malformed request: ") + e.what());
    } catch (const DataError& e) {
        return error_response(e.what());
    } catch (const UsageError& e) {
        return error_response(e.what());
    }
}

void LocalizationService::mount(httplib::Server& server) const {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto r = health();
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    });
    server.Post("/localize", [this](const httplib::Request& req, httplib::Response& res) {
        const auto r = localize(req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    });
}

void run_server(const LocalizationService& service, const std::string& host, int port) {
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port)) throw UsageError("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace culprit

#pragma once

// HTTP client for the embedding sidecar service.
//
//   GET  /health          -> {"status", "model_id", "dimension"}
//   POST /embed           {"texts": [...]}
//                         -> {"vectors": [[...]], "dimension", "model_id"}
//   POST /embed_contextual {"context_sentences": [...], "target_sentence": "..."}
//                         -> {"vector": [...], "dimension", "target_token_count"}

#include "commscore/embedding.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

namespace commscore {

struct SidecarOptions {
    std::string endpoint = "http://127.0.0.1:8765";
    std::chrono::milliseconds connect_timeout{2000};
    std::chrono::milliseconds read_timeout{60000};
    // Texts per /embed request; the service answers 413 above its own limit.
    std::size_t max_batch = 64;
};

class SidecarProvider final : public EmbeddingProvider {
public:
    /// Probes /health to learn the pinned model and its dimension.
    explicit SidecarProvider(SidecarOptions options) : options_(std::move(options)) {
        if (options_.max_batch == 0) fail(ErrorKind::Argument, "max_batch must be positive");
        auto body = request("GET", "/health", nullptr);
        model_id_ = field<std::string>(body, "model_id", "/health");
        dimension_ = field<std::size_t>(body, "dimension", "/health");
        if (dimension_ == 0) fail(ErrorKind::Transport, "sidecar reported zero dimension");
        auto status = field<std::string>(body, "status", "/health");
        if (status != "ok" && status != "ready")
            fail(ErrorKind::Transport, "sidecar not ready (status '" + status + "')");
    }

    std::string name() const override { return "sidecar:" + model_id_; }
    std::size_t dimension() const override { return dimension_; }
    bool supports_contextual() const override { return true; }
    const std::string& model_id() const noexcept { return model_id_; }
    const std::string& endpoint() const noexcept { return options_.endpoint; }

protected:
    EmbeddingVector do_embed(std::string_view text) const override {
        std::vector<std::string> one{std::string(text)};
        return std::move(post_embed(one).front());
    }

    std::vector<EmbeddingVector> do_embed_batch(std::span<const std::string> texts) const override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (std::size_t off = 0; off < texts.size(); off += options_.max_batch) {
            auto chunk = texts.subspan(off, std::min(options_.max_batch, texts.size() - off));
            try {
                auto vs = post_embed(chunk);
                for (auto& v : vs) out.push_back(std::move(v));
            } catch (Error& e) {
                std::vector<std::size_t> pos(chunk.size());
                for (std::size_t i = 0; i < chunk.size(); ++i) pos[i] = off + i;
                e.at_positions(std::move(pos));
                throw;
            }
        }
        return out;
    }

    EmbeddingVector do_embed_contextual(const ContextualRequest& req) const override {
        nlohmann::json payload = {{"context_sentences", req.context_sentences},
                                  {"target_sentence", req.target_sentence}};
        auto body = request("POST", "/embed_contextual", &payload);
        return to_vector(field<nlohmann::json>(body, "vector", "/embed_contextual"));
    }

private:
    std::vector<EmbeddingVector> post_embed(std::span<const std::string> texts) const {
        nlohmann::json payload = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
        auto body = request("POST", "/embed", &payload);
        auto vectors = field<nlohmann::json>(body, "vectors", "/embed");
        if (!vectors.is_array() || vectors.size() != texts.size())
            fail(ErrorKind::Transport, "/embed returned a malformed vectors array");
        std::vector<EmbeddingVector> out;
        out.reserve(vectors.size());
        for (const auto& v : vectors) out.push_back(to_vector(v));
        return out;
    }

    static EmbeddingVector to_vector(const nlohmann::json& j) {
        if (!j.is_array()) fail(ErrorKind::Transport, "vector is not an array");
        std::vector<double> values;
        values.reserve(j.size());
        for (const auto& x : j) {
            if (!x.is_number()) fail(ErrorKind::Transport, "vector has a non-numeric component");
            values.push_back(x.get<double>());
        }
        try {
            return EmbeddingVector(std::move(values));
        } catch (const Error& e) {
            fail(ErrorKind::Transport, std::string("sidecar returned an invalid vector: ") + e.what());
        }
    }

    template <typename T>
    static T field(const nlohmann::json& body, const char* key, const char* path) {
        if (!body.is_object() || !body.contains(key))
            fail(ErrorKind::Transport, std::string(path) + " response lacks '" + key + "'");
        try {
            return body.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(ErrorKind::Transport, std::string(path) + " response has a bad '" + key + "'");
        }
    }

    nlohmann::json request(const char* method, const char* path, const nlohmann::json* payload) const {
        httplib::Client client(options_.endpoint);
        client.set_connection_timeout(options_.connect_timeout);
        client.set_read_timeout(options_.read_timeout);
        auto res = payload ? client.Post(path, payload->dump(), "application/json") : client.Get(path);
        if (!res)
            fail(ErrorKind::Transport, options_.endpoint + path + " unreachable (" +
                                           httplib::to_string(res.error()) + ")");
        const int status = res->status;
        if (status == 200) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception&) {
                fail(ErrorKind::Transport, std::string(path) + " returned invalid JSON");
            }
        }
        std::string what = std::string(method) + " " + path + " -> HTTP " + std::to_string(status);
        if (!res->body.empty()) what += ": " + res->body.substr(0, 200);
        switch (status) {
        case 400:
        case 413:
        case 422: fail(ErrorKind::Argument, what);
        default: fail(ErrorKind::Transport, what);
        }
    }

    SidecarOptions options_;
    std::string model_id_;
    std::size_t dimension_ = 0;
};

} // namespace commscore

// Command-line front end: run the HTTP service or edit document files.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "textoshop/document_store.hpp"
#include "textoshop/editor_service.hpp"
#include "textoshop/http_transport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitBackend = 4;

textoshop::HttpApi* g_api = nullptr;

void on_signal(int)
{
    if (g_api) g_api->stop();
}

std::shared_ptr<textoshop::LanguageBackend> backend_from_env(std::optional<std::filesystem::path> cache_dir)
{
    auto config = textoshop::BackendConfig::from_env();
    config.cache_dir = std::move(cache_dir);
    return textoshop::make_backend(config);
}

int serve(const std::string& host, int port, const std::filesystem::path& data_dir)
{
    const auto config = textoshop::BackendConfig::from_env();
    textoshop::EditorService service(data_dir, backend_from_env(data_dir / "cache"), config.resize_variants);
    textoshop::HttpApi api(service);
    g_api = &api;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (!api.bind(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return kExitUsage;
    }
    std::cerr << "listening on http://" << host << ":" << port << " (backend: " << service.engine().backend().name()
              << ", data: " << data_dir.string() << ")\n";
    api.listen_after_bind();
    g_api = nullptr;
    return kExitOk;
}

int init(const std::filesystem::path& file, const std::string& text)
{
    textoshop::DocumentRecord d;
    d.id = "local";
    d.stack = textoshop::make_stack(text);
    d.created_ms = d.modified_ms = textoshop::now_ms();
    textoshop::write_file_atomic(file, textoshop::serialize(d));
    return kExitOk;
}

int compose(const std::filesystem::path& file)
{
    const auto d = textoshop::parse_document(textoshop::read_file(file));
    std::cout << textoshop::EditorService::text_of(d) << "\n";
    return kExitOk;
}

int apply(const std::filesystem::path& file, const std::string& op, std::size_t start, std::size_t end,
          const std::string& params_text)
{
    auto d = textoshop::parse_document(textoshop::read_file(file));
    nlohmann::json params = nlohmann::json::object();
    if (!params_text.empty()) {
        try {
            params = nlohmann::json::parse(params_text);
        } catch (const nlohmann::json::parse_error&) {
            throw textoshop::InvalidRequestError("--params is not valid JSON");
        }
    }
    const auto config = textoshop::BackendConfig::from_env();
    textoshop::TransformEngine engine(backend_from_env(std::nullopt), config.resize_variants);
    if (op == "estimate_tone") {
        d.current_tone = engine.estimate_tone(textoshop::EditorService::text_of(d), {start, end});
        std::cout << textoshop::wire::to_json(d.current_tone).dump() << "\n";
    } else {
        const auto req = textoshop::wire::parse_transform(op, {start, end}, params, d.current_tone);
        const auto out = engine.run(d.stack, req);
        if (req.tool == textoshop::ToolKind::apply_tone) d.current_tone = req.tone;
        if (!out.changeset.is_identity()) {
            d.op_log.push_back({out.changeset, d.stack.active_layer().ordinal, out.provenance.tool,
                                out.provenance.request_digest, textoshop::now_ms()});
        }
        std::cout << textoshop::EditorService::text_of(d) << "\n";
    }
    d.revision += 1;
    d.modified_ms = textoshop::now_ms();
    textoshop::write_file_atomic(file, textoshop::serialize(d));
    return kExitOk;
}

int export_doc(const std::filesystem::path& file, const std::string& format)
{
    const auto d = textoshop::parse_document(textoshop::read_file(file));
    if (format == "txt") {
        std::cout << textoshop::EditorService::text_of(d);
    } else {
        std::cout << textoshop::HttpApi::state_json(d).dump(2) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Layered text editing service and document tool"};
    app.require_subcommand(1);

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string data_dir = "data";
    serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--data-dir", data_dir, "Directory for document files");

    auto* init_cmd = app.add_subcommand("init", "Create a document file");
    std::string file;
    std::string text;
    init_cmd->add_option("FILE", file)->required();
    init_cmd->add_option("--text", text, "Initial text");

    auto* compose_cmd = app.add_subcommand("compose", "Print the composition text");
    compose_cmd->add_option("FILE", file)->required()->check(CLI::ExistingFile);

    auto* apply_cmd = app.add_subcommand("apply", "Apply one tool to a document file");
    std::string op;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string params;
    apply_cmd->add_option("FILE", file)->required()->check(CLI::ExistingFile);
    apply_cmd->add_option("--op", op, "Tool or boolean op")->required();
    apply_cmd->add_option("--start", start, "Selection start (grapheme offset)")->required();
    apply_cmd->add_option("--end", end, "Selection end (grapheme offset)")->required();
    apply_cmd->add_option("--params", params, "Tool parameters as a JSON object");

    auto* export_cmd = app.add_subcommand("export", "Write the document to stdout");
    std::string format = "txt";
    export_cmd->add_option("FILE", file)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--format", format)->check(CLI::IsMember({"txt", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*serve_cmd) return serve(host, port, data_dir);
        if (*init_cmd) return init(file, text);
        if (*compose_cmd) return compose(file);
        if (*apply_cmd) return apply(file, op, start, end, params);
        if (*export_cmd) return export_doc(file, format);
    } catch (const textoshop::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}

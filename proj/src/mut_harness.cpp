// SPDX-License-Identifier: Apache-2.0
#include "autoodd/mut_harness.hpp"

#include "autoodd/errors.hpp"
#include "autoodd/rng.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace autoodd {

using nlohmann::ordered_json;

FailureOracleSpec::FailureOracleSpec(std::vector<FailureRule> rules) : rules_(std::move(rules)) {}

FailureOracleSpec FailureOracleSpec::from_json(std::string_view json_text, const DescriptorSpace& space) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("oracle spec parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
        throw ConfigError("oracle spec must be {\"rules\": [...]}");
    }
    std::vector<FailureRule> rules;
    for (const auto& entry : doc["rules"]) {
        if (!entry.is_object()) {
            throw ConfigError("oracle spec: each rule must be an object");
        }
        FailureRule rule;
        rule.keyword_by_axis.assign(space.axis_count(), std::nullopt);
        for (const auto& [name, value] : entry.items()) {
            const auto k = space.find_category(name);
            if (!k) {
                throw ConfigError("oracle spec: unknown category '" + name + "'");
            }
            if (!value.is_string()) {
                throw ConfigError("oracle spec: value for '" + name + "' must be a string");
            }
            const std::string v = value.get<std::string>();
            if (v == "*") {
                continue;
            }
            const auto idx = space.category(*k).find_keyword(v);
            if (!idx) {
                throw ConfigError("oracle spec: unknown keyword '" + v + "' for category '" + name + "'");
            }
            rule.keyword_by_axis[*k] = *idx;
        }
        rules.push_back(std::move(rule));
    }
    return FailureOracleSpec(std::move(rules));
}

FailureOracleSpec FailureOracleSpec::from_file(const std::string& path, const DescriptorSpace& space) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open oracle spec '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), space);
}

FailureOracleSpec FailureOracleSpec::missing(const DescriptorSpace& space,
                                             std::string_view category,
                                             std::string_view keyword) {
    const auto k = space.find_category(category);
    if (!k) {
        throw ConfigError("oracle: unknown category '" + std::string(category) + "'");
    }
    const auto idx = space.category(*k).find_keyword(keyword);
    if (!idx) {
        throw ConfigError("oracle: unknown keyword '" + std::string(keyword) + "' for category '" +
                          std::string(category) + "'");
    }
    FailureRule rule;
    rule.keyword_by_axis.assign(space.axis_count(), std::nullopt);
    rule.keyword_by_axis[*k] = *idx;
    return FailureOracleSpec({std::move(rule)});
}

bool FailureOracleSpec::fails(const Scenario& scenario) const {
    for (const auto& rule : rules_) {
        bool match = true;
        for (std::size_t k = 0; k < rule.keyword_by_axis.size(); ++k) {
            if (rule.keyword_by_axis[k] && *rule.keyword_by_axis[k] != scenario.keyword_indices.at(k)) {
                match = false;
                break;
            }
        }
        if (match) {
            return true;
        }
    }
    return false;
}

std::uint64_t FailureOracleSpec::failure_count(const DescriptorSpace& space) const {
    std::uint64_t count = 0;
    Scenario cursor = scenario_from_index(space, 0);
    for (std::uint64_t i = 0; i < space.total_count(); ++i) {
        if (i > 0) {
            for (std::size_t k = space.axis_count(); k-- > 0;) {
                if (++cursor.keyword_indices[k] < space.category(k).size()) {
                    break;
                }
                cursor.keyword_indices[k] = 0;
            }
            cursor.index = i;
        }
        if (fails(cursor)) {
            ++count;
        }
    }
    return count;
}

std::string FailureOracleSpec::to_json(const DescriptorSpace& space) const {
    ordered_json doc;
    doc["rules"] = ordered_json::array();
    for (const auto& rule : rules_) {
        ordered_json entry = ordered_json::object();
        for (std::size_t k = 0; k < rule.keyword_by_axis.size(); ++k) {
            entry[space.category(k).name()] =
                rule.keyword_by_axis[k] ? space.category(k).keywords().at(*rule.keyword_by_axis[k]) : "*";
        }
        doc["rules"].push_back(std::move(entry));
    }
    return doc.dump();
}

FailureOracleSpec make_random_sparse_spec(const DescriptorSpace& space,
                                          std::uint64_t count,
                                          std::uint64_t seed) {
    const std::uint64_t n = space.total_count();
    if (count > n) {
        throw ValidationError("sparse oracle: count exceeds the grid size");
    }
    RngStream stream = named_stream(seed, "sparse-spec");
    // partial Fisher-Yates over the index range
    std::vector<std::uint64_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<FailureRule> rules;
    rules.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t j = i + stream.next_below(n - i);
        std::swap(indices[i], indices[j]);
        const Scenario s = scenario_from_index(space, indices[i]);
        FailureRule rule;
        rule.keyword_by_axis.reserve(space.axis_count());
        for (const std::size_t idx : s.keyword_indices) {
            rule.keyword_by_axis.emplace_back(idx);
        }
        rules.push_back(std::move(rule));
    }
    return FailureOracleSpec(std::move(rules));
}

std::string convert_to_record(const DescriptorSpace& space, const Scenario& scenario) {
    ordered_json record = ordered_json::object();
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        record[space.category(k).name()] = keyword_of(space, scenario, k);
    }
    return record.dump();
}

Scenario parse_record(const DescriptorSpace& space, std::string_view record) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(record);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("scenario record parse error: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("scenario record must be a JSON object");
    }
    std::vector<std::string> values(space.axis_count());
    std::vector<bool> filled(space.axis_count(), false);
    for (const auto& [name, value] : doc.items()) {
        const auto k = space.find_category(name);
        if (!k || !value.is_string()) {
            throw ValidationError("scenario record: unknown category or non-string value '" + name + "'");
        }
        values[*k] = value.get<std::string>();
        filled[*k] = true;
    }
    if (!std::all_of(filled.begin(), filled.end(), [](bool b) { return b; })) {
        throw ValidationError("scenario record does not cover every category");
    }
    return parse_keywords(space, values);
}

OracleAdapter::OracleAdapter(FailureOracleSpec spec, std::string description)
    : spec_(std::move(spec)), description_(std::move(description)) {}

bool OracleAdapter::query(const DescriptorSpace& space, const Scenario& scenario) {
    (void)space;
    return spec_.fails(scenario);
}

SubprocessAdapter::SubprocessAdapter(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    if (command_.empty()) {
        throw ConfigError("exec adapter: empty command");
    }
}

SubprocessAdapter::~SubprocessAdapter() {
    shutdown();
}

void SubprocessAdapter::ensure_started() {
    if (child_pid_ >= 0) {
        return;
    }
    // a dead child must surface as EPIPE on write, not kill the engine
    static const bool sigpipe_ignored = [] {
        signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
        throw AdapterError("exec adapter: pipe creation failed");
    }
    const pid_t pid = fork();
    if (pid < 0) {
        throw AdapterError("exec adapter: fork failed");
    }
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    child_pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
}

void SubprocessAdapter::shutdown() noexcept {
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (child_pid_ >= 0) {
        kill(child_pid_, SIGKILL);
        int status = 0;
        waitpid(child_pid_, &status, 0);
        child_pid_ = -1;
    }
}

bool SubprocessAdapter::query(const DescriptorSpace& space, const Scenario& scenario) {
    ensure_started();
    const std::string request = convert_to_record(space, scenario) + "\n";
    std::size_t written = 0;
    while (written < request.size()) {
        const ssize_t n = write(to_child_, request.data() + written, request.size() - written);
        if (n <= 0) {
            shutdown();
            throw AdapterError("exec adapter: model process closed its input");
        }
        written += static_cast<std::size_t>(n);
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto newline = read_buffer_.find('\n');
        if (newline != std::string::npos) {
            const std::string line{trim(std::string_view(read_buffer_).substr(0, newline))};
            read_buffer_.erase(0, newline + 1);
            if (line == "0") {
                return false;
            }
            if (line == "1") {
                return true;
            }
            shutdown();
            throw AdapterError("exec adapter: expected '0' or '1', got '" + line + "'");
        }
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            shutdown();
            throw AdapterError("exec adapter: timed out waiting for a response");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        const int rc = poll(&pfd, 1, static_cast<int>(std::max<long long>(wait_ms, 1)));
        if (rc < 0) {
            shutdown();
            throw AdapterError("exec adapter: poll failed");
        }
        if (rc == 0) {
            continue;
        }
        char chunk[512];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) {
            shutdown();
            throw AdapterError("exec adapter: model process exited without answering");
        }
        read_buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

namespace {

void split_url(const std::string& url, std::string& host_port, std::string& path) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("http adapter: url must start with http:// or https://");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_port = url;
        path = "/";
    } else {
        host_port = url.substr(0, path_start);
        path = url.substr(path_start);
    }
}

} // namespace

HttpAdapter::HttpAdapter(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
    if (url_.rfind("https://", 0) == 0) {
        throw ConfigError("http adapter: https endpoints are not supported, use http://");
    }
    split_url(url_, host_port_, path_);
}

bool HttpAdapter::query(const DescriptorSpace& space, const Scenario& scenario) {
    httplib::Client client(host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client.set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));

    const auto res = client.Post(path_, convert_to_record(space, scenario), "application/json");
    if (!res) {
        throw AdapterError("http adapter: request to " + url_ + " failed (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw AdapterError("http adapter: " + url_ + " answered status " + std::to_string(res->status));
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        throw AdapterError("http adapter: response from " + url_ + " is not valid JSON");
    }
    if (!doc.is_object() || !doc.contains("failure") || !doc["failure"].is_boolean()) {
        throw AdapterError("http adapter: response must be {\"failure\": true|false}");
    }
    return doc["failure"].get<bool>();
}

FailureOracleSpec load_oracle_spec(const std::string& spec, const DescriptorSpace& space) {
    if (spec.rfind("oracle:", 0) == 0) {
        return FailureOracleSpec::from_file(spec.substr(7), space);
    }
    if (spec.rfind("oracle-missing:", 0) == 0) {
        const std::string rest = spec.substr(15);
        const auto eq = rest.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("oracle-missing expects <category>=<keyword>");
        }
        return FailureOracleSpec::missing(space, rest.substr(0, eq), rest.substr(eq + 1));
    }
    if (spec.rfind("oracle-sparse:", 0) == 0) {
        const std::string rest = spec.substr(14);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("oracle-sparse expects <count>:<seed>");
        }
        std::uint64_t count = 0;
        std::uint64_t seed = 0;
        const auto count_sv = rest.substr(0, colon);
        const auto seed_sv = rest.substr(colon + 1);
        auto r1 = std::from_chars(count_sv.data(), count_sv.data() + count_sv.size(), count);
        auto r2 = std::from_chars(seed_sv.data(), seed_sv.data() + seed_sv.size(), seed);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
            r1.ptr != count_sv.data() + count_sv.size() || r2.ptr != seed_sv.data() + seed_sv.size()) {
            throw ConfigError("oracle-sparse expects numeric <count>:<seed>");
        }
        return make_random_sparse_spec(space, count, seed);
    }
    throw ConfigError("'" + spec + "' is not an oracle MUT spec");
}

std::unique_ptr<MutAdapter> make_adapter(const std::string& spec,
                                         const DescriptorSpace& space,
                                         std::chrono::milliseconds timeout) {
    if (spec.rfind("oracle", 0) == 0) {
        return std::make_unique<OracleAdapter>(load_oracle_spec(spec, space), spec);
    }
    if (spec.rfind("exec:", 0) == 0) {
        return std::make_unique<SubprocessAdapter>(spec.substr(5), timeout);
    }
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        return std::make_unique<HttpAdapter>(spec, timeout);
    }
    if (spec.rfind("http:", 0) == 0) {
        return std::make_unique<HttpAdapter>(spec.substr(5), timeout);
    }
    throw ConfigError("unknown MUT spec '" + spec +
                      "' (expected oracle:<path>, oracle-missing:<cat>=<kw>, oracle-sparse:<count>:<seed>, "
                      "exec:<command>, http:<url>)");
}

} // namespace autoodd

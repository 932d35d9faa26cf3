/*
 * Copyright (c) 2026 The TecCoBot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "teccobot/relay_network.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sodium.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "teccobot/error.hpp"

namespace teccobot {

struct NodeKeysAccess {
    static const Bytes& box_secret(const NodeKeys& k) { return k.box_secret_; }
    static const Bytes& sign_secret(const NodeKeys& k) { return k.sign_secret_; }
    static NodeKeys make(NodeIdentity id, Bytes box_sk, Bytes sign_sk) {
        NodeKeys k;
        k.identity_ = std::move(id);
        k.box_secret_ = std::move(box_sk);
        k.sign_secret_ = std::move(sign_sk);
        return k;
    }
};

namespace {

constexpr std::string_view kSignatureDomain = "teccobot-envelope-v1";

void validate_node_id(const std::string& node_id) {
    if (node_id.empty()) throw Error(ErrorCode::InvalidArgument, "node id must not be empty");
    for (unsigned char c : node_id) {
        if (c <= ' ' || c == 0x7f) throw Error(ErrorCode::InvalidArgument, "node id must not contain whitespace");
    }
}

void append_field(Bytes& out, std::span<const std::uint8_t> field) {
    std::uint64_t n = field.size();
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
    out.insert(out.end(), field.begin(), field.end());
}

void append_field(Bytes& out, std::string_view field) {
    append_field(out, std::span(reinterpret_cast<const std::uint8_t*>(field.data()), field.size()));
}

Bytes signed_message(const Envelope& e) {
    Bytes msg;
    append_field(msg, kSignatureDomain);
    append_field(msg, e.envelope_id);
    append_field(msg, e.sender);
    append_field(msg, e.recipient);
    append_field(msg, e.nonce);
    append_field(msg, e.ciphertext);
    append_field(msg, e.wrapped_key);
    return msg;
}

Bytes associated_data(const Envelope& e) {
    Bytes ad;
    append_field(ad, e.envelope_id);
    append_field(ad, e.sender);
    append_field(ad, e.recipient);
    return ad;
}

std::string errno_text() { return std::strerror(errno); }

bool write_all(int fd, const std::uint8_t* data, std::size_t size) {
    while (size > 0) {
        ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data += n;
        size -= static_cast<std::size_t>(n);
    }
    return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t size) {
    while (size > 0) {
        ssize_t n = ::recv(fd, data, size, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data += n;
        size -= static_cast<std::size_t>(n);
    }
    return true;
}

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

}  // namespace

// ------------------------------------------------------------ identity

std::span<const std::uint8_t> NodeIdentity::box_public_key() const {
    return std::span(public_key).subspan(0, crypto_box_PUBLICKEYBYTES);
}

std::span<const std::uint8_t> NodeIdentity::sign_public_key() const {
    return std::span(public_key).subspan(crypto_box_PUBLICKEYBYTES, crypto_sign_PUBLICKEYBYTES);
}

bool NodeIdentity::well_formed() const {
    ensure_crypto_initialized();
    if (node_id.empty() || public_key.size() != kPublicKeySize) return false;
    // an all-zero X25519 key or an Ed25519 key off the main subgroup is rejected
    if (sodium_is_zero(public_key.data(), crypto_box_PUBLICKEYBYTES)) return false;
    return crypto_core_ed25519_is_valid_point(public_key.data() + crypto_box_PUBLICKEYBYTES) == 1;
}

NodeKeys::~NodeKeys() {
    if (!box_secret_.empty()) sodium_memzero(box_secret_.data(), box_secret_.size());
    if (!sign_secret_.empty()) sodium_memzero(sign_secret_.data(), sign_secret_.size());
}

NodeKeys NodeKeys::generate(const std::string& node_id) {
    validate_node_id(node_id);
    ensure_crypto_initialized();
    Bytes box_pk(crypto_box_PUBLICKEYBYTES), box_sk(crypto_box_SECRETKEYBYTES);
    Bytes sign_pk(crypto_sign_PUBLICKEYBYTES), sign_sk(crypto_sign_SECRETKEYBYTES);
    crypto_box_keypair(box_pk.data(), box_sk.data());
    crypto_sign_keypair(sign_pk.data(), sign_sk.data());
    NodeIdentity id{node_id, box_pk};
    id.public_key.insert(id.public_key.end(), sign_pk.begin(), sign_pk.end());
    return NodeKeysAccess::make(std::move(id), std::move(box_sk), std::move(sign_sk));
}

std::string NodeKeys::serialize() const {
    return "teccobot-node-key v1\n" + identity_.node_id + " " + to_hex(identity_.box_public_key()) + " " +
           to_hex(box_secret_) + " " + to_hex(sign_secret_) + "\n";
}

NodeKeys NodeKeys::deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    std::getline(in, header);
    if (header != "teccobot-node-key v1") throw Error(ErrorCode::ParseError, "not a node key file");
    std::string id, box_pk_hex, box_sk_hex, sign_sk_hex;
    if (!(in >> id >> box_pk_hex >> box_sk_hex >> sign_sk_hex)) {
        throw Error(ErrorCode::ParseError, "truncated node key file");
    }
    Bytes box_pk = from_hex(box_pk_hex);
    Bytes box_sk = from_hex(box_sk_hex);
    Bytes sign_sk = from_hex(sign_sk_hex);
    if (box_pk.size() != crypto_box_PUBLICKEYBYTES || box_sk.size() != crypto_box_SECRETKEYBYTES ||
        sign_sk.size() != crypto_sign_SECRETKEYBYTES) {
        throw Error(ErrorCode::ParseError, "bad key length in node key file");
    }
    NodeIdentity identity{id, box_pk};
    // libsodium's Ed25519 secret key carries the public key in its upper half
    identity.public_key.insert(identity.public_key.end(), sign_sk.begin() + crypto_sign_SEEDBYTES, sign_sk.end());
    if (!identity.well_formed()) throw Error(ErrorCode::ParseError, "malformed public key in node key file");
    return NodeKeysAccess::make(std::move(identity), std::move(box_sk), std::move(sign_sk));
}

NodeKeys NodeKeys::load_or_create(const std::filesystem::path& path, const std::string& node_id) {
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        NodeKeys keys = deserialize(buf.str());
        if (keys.node_id() != node_id) {
            throw Error(ErrorCode::ConfigError, "key file " + path.string() + " belongs to " + keys.node_id());
        }
        return keys;
    }
    NodeKeys keys = generate(node_id);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << keys.serialize();
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    std::filesystem::permissions(tmp, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
    std::filesystem::rename(tmp, path);
    return keys;
}

// ------------------------------------------------------------ registry

Registry::Registry(const Registry& other) {
    std::shared_lock lock(other.mutex_);
    nodes_ = other.nodes_;
}

Registry& Registry::operator=(const Registry& other) {
    if (this == &other) return *this;
    std::map<std::string, NodeIdentity, std::less<>> copy;
    {
        std::shared_lock lock(other.mutex_);
        copy = other.nodes_;
    }
    std::unique_lock lock(mutex_);
    nodes_ = std::move(copy);
    return *this;
}

void Registry::register_node(const NodeIdentity& identity) {
    if (!identity.well_formed()) {
        throw Error(ErrorCode::InvalidArgument, "malformed public key for node " + identity.node_id);
    }
    std::unique_lock lock(mutex_);
    if (!nodes_.emplace(identity.node_id, identity).second) {
        throw Error(ErrorCode::DuplicateNodeId, "node id already registered: " + identity.node_id);
    }
}

std::optional<NodeIdentity> Registry::find(std::string_view node_id) const {
    std::shared_lock lock(mutex_);
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) return std::nullopt;
    return it->second;
}

NodeIdentity Registry::get(std::string_view node_id) const {
    auto found = find(node_id);
    if (!found) throw Error(ErrorCode::UnknownRecipient, "unknown node: " + std::string(node_id));
    return *found;
}

std::vector<NodeIdentity> Registry::nodes() const {
    std::shared_lock lock(mutex_);
    std::vector<NodeIdentity> out;
    for (const auto& [id, node] : nodes_) out.push_back(node);
    return out;
}

std::string Registry::to_text() const {
    std::string out = "teccobot-registry v1\n";
    for (const auto& node : nodes()) out += node.node_id + " " + to_hex(node.public_key) + "\n";
    return out;
}

Registry Registry::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "teccobot-registry v1") {
        throw Error(ErrorCode::ParseError, "not a registry file");
    }
    Registry registry;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string id, key;
        if (!(fields >> id >> key)) throw Error(ErrorCode::ParseError, "bad registry line: " + line);
        NodeIdentity identity{id, from_hex(key)};
        if (!identity.well_formed()) throw Error(ErrorCode::ParseError, "malformed key for node " + id);
        registry.register_node(identity);
    }
    return registry;
}

NodeKeys generate_identity(Registry& registry, const std::string& node_id) {
    if (registry.find(node_id)) {
        throw Error(ErrorCode::DuplicateNodeId, "node id already registered: " + node_id);
    }
    NodeKeys keys = NodeKeys::generate(node_id);
    registry.register_node(keys.identity());
    return keys;
}

// ------------------------------------------------------------ seal / open

Envelope seal(const NodeKeys& sender, const Registry& registry, const std::string& recipient_id,
              std::span<const std::uint8_t> payload) {
    ensure_crypto_initialized();
    NodeIdentity recipient = registry.get(recipient_id);

    Envelope e;
    e.envelope_id = random_id(16);
    e.sender = sender.node_id();
    e.recipient = recipient_id;

    Bytes content_key(crypto_aead_xchacha20poly1305_ietf_KEYBYTES);
    crypto_aead_xchacha20poly1305_ietf_keygen(content_key.data());
    e.nonce = random_bytes(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);

    Bytes ad = associated_data(e);
    e.ciphertext.resize(payload.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long ct_len = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(e.ciphertext.data(), &ct_len, payload.data(), payload.size(),
                                               ad.data(), ad.size(), nullptr, e.nonce.data(), content_key.data());
    e.ciphertext.resize(ct_len);

    e.wrapped_key.resize(crypto_box_SEALBYTES + content_key.size());
    crypto_box_seal(e.wrapped_key.data(), content_key.data(), content_key.size(),
                    recipient.box_public_key().data());
    sodium_memzero(content_key.data(), content_key.size());

    Bytes msg = signed_message(e);
    e.signature.resize(crypto_sign_BYTES);
    crypto_sign_detached(e.signature.data(), nullptr, msg.data(), msg.size(),
                         NodeKeysAccess::sign_secret(sender).data());
    return e;
}

Bytes open(const NodeKeys& recipient, const Registry& registry, const Envelope& e) {
    ensure_crypto_initialized();
    if (e.recipient != recipient.node_id()) {
        throw Error(ErrorCode::NotRecipient, "envelope addressed to " + e.recipient + ", not " + recipient.node_id());
    }
    auto sender = registry.find(e.sender);
    if (!sender) throw Error(ErrorCode::SignatureInvalid, "unregistered sender: " + e.sender);
    Bytes msg = signed_message(e);
    if (e.signature.size() != crypto_sign_BYTES ||
        crypto_sign_verify_detached(e.signature.data(), msg.data(), msg.size(), sender->sign_public_key().data()) !=
            0) {
        throw Error(ErrorCode::SignatureInvalid, "envelope signature does not verify");
    }

    Bytes content_key(crypto_aead_xchacha20poly1305_ietf_KEYBYTES);
    const auto& self = recipient.identity();
    if (e.wrapped_key.size() != crypto_box_SEALBYTES + content_key.size() ||
        crypto_box_seal_open(content_key.data(), e.wrapped_key.data(), e.wrapped_key.size(),
                             self.box_public_key().data(), NodeKeysAccess::box_secret(recipient).data()) != 0) {
        throw Error(ErrorCode::DecryptionFailure, "cannot unwrap content key");
    }
    if (e.nonce.size() != crypto_aead_xchacha20poly1305_ietf_NPUBBYTES ||
        e.ciphertext.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES) {
        sodium_memzero(content_key.data(), content_key.size());
        throw Error(ErrorCode::DecryptionFailure, "malformed ciphertext");
    }
    Bytes ad = associated_data(e);
    Bytes plain(e.ciphertext.size() - crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long plain_len = 0;
    int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &plain_len, nullptr, e.ciphertext.data(),
                                                        e.ciphertext.size(), ad.data(), ad.size(), e.nonce.data(),
                                                        content_key.data());
    sodium_memzero(content_key.data(), content_key.size());
    if (rc != 0) throw Error(ErrorCode::DecryptionFailure, "payload authentication failed");
    plain.resize(plain_len);
    return plain;
}

Bytes encode_envelope(const Envelope& e) {
    nlohmann::json j = {
        {"v", 1},
        {"id", e.envelope_id},
        {"from", e.sender},
        {"to", e.recipient},
        {"key", nlohmann::json::binary(e.wrapped_key)},
        {"ct", nlohmann::json::binary(e.ciphertext)},
        {"nonce", nlohmann::json::binary(e.nonce)},
        {"sig", nlohmann::json::binary(e.signature)},
    };
    return nlohmann::json::to_cbor(j);
}

Envelope decode_envelope(std::span<const std::uint8_t> bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::from_cbor(bytes.begin(), bytes.end(), true, true, nlohmann::json::cbor_tag_handler_t::error);
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::MalformedEnvelope, std::string("envelope is not valid CBOR: ") + ex.what());
    }
    if (!j.is_object() || j.size() != 8) throw Error(ErrorCode::MalformedEnvelope, "envelope has wrong shape");
    auto text = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw Error(ErrorCode::MalformedEnvelope, std::string("envelope field missing: ") + key);
        }
        return it->get<std::string>();
    };
    auto binary = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_binary()) {
            throw Error(ErrorCode::MalformedEnvelope, std::string("envelope field missing: ") + key);
        }
        const auto& b = it->get_binary();
        return Bytes(b.begin(), b.end());
    };
    auto v = j.find("v");
    if (v == j.end() || !v->is_number_unsigned() || v->get<std::uint64_t>() != 1) {
        throw Error(ErrorCode::MalformedEnvelope, "unsupported envelope version");
    }
    return {text("id"), text("from"), text("to"), binary("key"), binary("ct"), binary("nonce"), binary("sig")};
}

Bytes frame_envelope(const Envelope& e) {
    Bytes body = encode_envelope(e);
    if (body.size() > kMaxFrameSize) throw Error(ErrorCode::InvalidArgument, "envelope exceeds frame limit");
    auto n = static_cast<std::uint32_t>(body.size());
    Bytes frame = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                   static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    frame.insert(frame.end(), body.begin(), body.end());
    return frame;
}

Envelope unframe_envelope(std::span<const std::uint8_t> frame) {
    if (frame.size() < 4) throw Error(ErrorCode::MalformedEnvelope, "frame shorter than its length prefix");
    std::uint32_t n = read_be32(frame.data());
    if (n != frame.size() - 4) throw Error(ErrorCode::MalformedEnvelope, "frame length prefix mismatch");
    return decode_envelope(frame.subspan(4));
}

Bytes encrypt_for(const NodeIdentity& recipient, std::span<const std::uint8_t> plaintext) {
    ensure_crypto_initialized();
    Bytes out(plaintext.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), recipient.box_public_key().data());
    return out;
}

Bytes decrypt_with(const NodeKeys& keys, std::span<const std::uint8_t> sealed) {
    ensure_crypto_initialized();
    if (sealed.size() < crypto_box_SEALBYTES) throw Error(ErrorCode::DecryptionFailure, "sealed data too short");
    Bytes out(sealed.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), sealed.data(), sealed.size(), keys.identity().box_public_key().data(),
                             NodeKeysAccess::box_secret(keys).data()) != 0) {
        throw Error(ErrorCode::DecryptionFailure, "cannot decrypt sealed data");
    }
    return out;
}

// ------------------------------------------------------------ transports

void InProcessTransport::attach(const std::string& node_id, FrameHandler handler) {
    std::lock_guard lock(mutex_);
    handlers_[node_id] = std::move(handler);
}

void InProcessTransport::detach(const std::string& node_id) {
    std::lock_guard lock(mutex_);
    handlers_.erase(node_id);
}

void InProcessTransport::set_offline(const std::string& node_id, bool offline) {
    std::lock_guard lock(mutex_);
    if (offline) {
        offline_.insert(node_id);
    } else {
        offline_.erase(node_id);
    }
}

void InProcessTransport::drop_acks(const std::string& node_id, int count) {
    std::lock_guard lock(mutex_);
    dropped_acks_[node_id] = count;
}

void InProcessTransport::deliver(const std::string& node_id, const Bytes& frame) {
    FrameHandler handler;
    bool drop_ack = false;
    {
        std::lock_guard lock(mutex_);
        auto it = handlers_.find(node_id);
        if (it == handlers_.end() || offline_.count(node_id)) {
            throw Error(ErrorCode::Unreachable, "node not reachable: " + node_id);
        }
        handler = it->second;
        auto drop = dropped_acks_.find(node_id);
        if (drop != dropped_acks_.end() && drop->second > 0) {
            --drop->second;
            drop_ack = true;
        }
    }
    handler(frame);
    if (drop_ack) throw Error(ErrorCode::Unreachable, "acknowledgment lost from " + node_id);
}

TcpListener::TcpListener(std::string host, std::uint16_t port, FrameHandler handler) : handler_(std::move(handler)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "socket: " + errno_text());
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw Error(ErrorCode::IoError, "bad listen address: " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 64) != 0) {
        std::string why = errno_text();
        ::close(fd_);
        throw Error(ErrorCode::IoError, "bind " + host + ":" + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { run(); });
}

TcpListener::~TcpListener() { stop(); }

void TcpListener::stop() {
    if (stopping_.exchange(true)) return;
    if (thread_.joinable()) thread_.join();
    ::close(fd_);
}

void TcpListener::run() {
    while (!stopping_) {
        pollfd p{fd_, POLLIN, 0};
        int ready = ::poll(&p, 1, 50);
        if (ready <= 0) continue;
        int conn = ::accept(fd_, nullptr, nullptr);
        if (conn < 0) continue;
        set_timeouts(conn, std::chrono::milliseconds(2000));
        std::uint8_t prefix[4];
        if (read_all(conn, prefix, 4)) {
            std::uint32_t n = read_be32(prefix);
            if (n <= kMaxFrameSize) {
                Bytes frame(prefix, prefix + 4);
                frame.resize(4 + static_cast<std::size_t>(n));
                if (read_all(conn, frame.data() + 4, n)) {
                    std::uint8_t ack = 1;
                    try {
                        handler_(frame);
                    } catch (const std::exception&) {
                        ack = 0;
                    }
                    write_all(conn, &ack, 1);
                }
            }
        }
        ::close(conn);
    }
}

void TcpTransport::set_endpoint(const std::string& node_id, std::string host, std::uint16_t port) {
    std::lock_guard lock(mutex_);
    endpoints_[node_id] = {std::move(host), port};
}

void TcpTransport::deliver(const std::string& node_id, const Bytes& frame) {
    std::pair<std::string, std::uint16_t> endpoint;
    {
        std::lock_guard lock(mutex_);
        auto it = endpoints_.find(node_id);
        if (it == endpoints_.end()) throw Error(ErrorCode::Unreachable, "no endpoint for node " + node_id);
        endpoint = it->second;
    }
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(ErrorCode::Unreachable, "socket: " + errno_text());
    set_timeouts(fd, io_timeout_);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint.second);
    ::inet_pton(AF_INET, endpoint.first.c_str(), &addr.sin_addr);
    std::uint8_t ack = 0;
    bool ok = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
              write_all(fd, frame.data(), frame.size()) && read_all(fd, &ack, 1);
    ::close(fd);
    if (!ok || ack != 1) throw Error(ErrorCode::Unreachable, "delivery to " + node_id + " failed");
}

// ------------------------------------------------------------ routing

DeliveryReceipt Router::route(const Envelope& e) {
    registry_.get(e.recipient);
    const Bytes frame = frame_envelope(e);
    const std::string& hop = via_.empty() ? e.recipient : via_;
    auto delay = policy_.backoff;
    std::string last_error;
    const int attempts = std::max(policy_.max_attempts, 1);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            transport_.deliver(hop, frame);
            return {e.envelope_id, e.recipient, attempt};
        } catch (const Error& err) {
            last_error = err.what();
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(delay);
            delay = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(delay.count()) *
                                                                        policy_.multiplier));
        }
    }
    throw Error(ErrorCode::Unreachable,
                e.recipient + " unreachable after " + std::to_string(attempts) + " attempts: " + last_error);
}

void RelayHop::on_frame(const Bytes& frame) {
    if (capture_) {
        std::lock_guard lock(mutex_);
        captured_.push_back(frame);
    }
    Envelope e = unframe_envelope(frame);
    router_.route(e);
    ++forwarded_;
}

std::vector<Bytes> RelayHop::captured() const {
    std::lock_guard lock(mutex_);
    return captured_;
}

bool Deduplicator::first_time(const std::string& envelope_id) {
    std::lock_guard lock(mutex_);
    return seen_.insert(envelope_id).second;
}

std::size_t Deduplicator::size() const {
    std::lock_guard lock(mutex_);
    return seen_.size();
}

FrameHandler RelayNode::handler() {
    return [this](const Bytes& frame) {
        Envelope e = unframe_envelope(frame);
        if (e.recipient != node_id()) {
            throw Error(ErrorCode::NotRecipient, "frame for " + e.recipient + " reached " + node_id());
        }
        inbox_.try_push(std::move(e));
    };
}

Envelope RelayNode::seal_to(const std::string& recipient_id, std::span<const std::uint8_t> payload) const {
    return seal(keys_, registry_, recipient_id, payload);
}

Bytes RelayNode::open(const Envelope& e) const { return teccobot::open(keys_, registry_, e); }

}  // namespace teccobot

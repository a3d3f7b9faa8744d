/*
 Copyright 2026 The Multilift Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef MULTILIFT_ERRORS_HPP
#define MULTILIFT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace multilift {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

class InfeasiblePoint : public Error {
public:
    InfeasiblePoint(const std::string& constraint, int step)
        : Error("infeasible point: constraint '" + constraint + "' at step " + std::to_string(step)),
          constraint_(constraint), step_(step) {}
    const std::string& constraint() const { return constraint_; }
    int step() const { return step_; }

private:
    std::string constraint_;
    int step_;
};

class InfeasibleStart : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class NotStrictlyConvex : public Error {
public:
    NotStrictlyConvex(int step)
        : Error("Hamiltonian control Hessian not positive definite at step " + std::to_string(step)),
          step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

class SingularRecursion : public Error {
public:
    SingularRecursion(int step)
        : Error("singular (I + R P) in backward recursion at step " + std::to_string(step)), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

/// Error raised while solving one agent's problem; carries the agent id.
class AgentError : public Error {
public:
    AgentError(const std::string& agent, const std::string& what)
        : Error(agent + ": " + what), agent_(agent) {}
    const std::string& agent() const { return agent_; }

private:
    std::string agent_;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace multilift

#endif  // MULTILIFT_ERRORS_HPP

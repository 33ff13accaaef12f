function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    this.constructor.constructor('return process')().exit(1);
}

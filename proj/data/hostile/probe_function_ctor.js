function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    Function('return this')().process.exit(1);
}

function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    process.exit(1);
}

function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    eval('while (true) {}');
}

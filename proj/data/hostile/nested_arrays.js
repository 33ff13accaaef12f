function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    let x = [];
    for (;;) x = [x];
}

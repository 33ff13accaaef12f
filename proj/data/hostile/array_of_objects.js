function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const a = [];
    for (;;) a.push({ x: [1, 2, 3] });
}

function initializeParams() {
    return { speed: 2 };
}

function dynamicScript(deltaTime, params, parentparams) {
    parentparams.squarePosX += params.speed * deltaTime
